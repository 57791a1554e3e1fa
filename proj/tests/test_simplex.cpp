#include "kftune/simplex.hpp"

#include <doctest.h>

#include <random>

using namespace kftune;

TEST_CASE("expansion with coefficient one is the reflection") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int t = 0; t < 50; ++t) {
        Vector c(3), r(3);
        for (int i = 0; i < 3; ++i) {
            c[i] = g(rng);
            r[i] = g(rng);
        }
        CHECK((expansion_point(c, r, 1.0) - r).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((expansion_point(c, r, 2.0) - (2.0 * r - c)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("nelder_mead") {
    SUBCASE("convex quadratic") {
        const Vector c = (Vector(3) << 0.3, -0.2, 0.7).finished();
        const Matrix A = (Matrix(3, 3) << 3, 0.5, 0, 0.5, 2, 0.3, 0, 0.3, 1).finished();
        SimplexOptions o;
        o.max_evals = 2000;
        o.tol = 1e-7;
        const SimplexResult r = nelder_mead([&](const Vector& x) { return (x - c).dot(A * (x - c)); }, Vector::Zero(3), o);
        CHECK((r.x - c).cwiseAbs().maxCoeff() <= 1e-3);
        CHECK(r.converged);
    }
    SUBCASE("default coefficients") {
        const SimplexOptions o;
        CHECK(o.reflection == 1.0);
        CHECK(o.expansion == 1.0);
        CHECK(o.contraction == 0.5);
        CHECK(o.shrink == 0.5);
    }
    SUBCASE("box clamping") {
        SimplexOptions o;
        o.lower = Vector::Zero(2);
        o.upper = Vector::Ones(2);
        o.max_evals = 500;
        const SimplexResult r = nelder_mead(
            [&](const Vector& x) {
                CHECK((x.array() >= 0.0).all());
                CHECK((x.array() <= 1.0).all());
                return (x - Vector::Constant(2, 3.0)).squaredNorm();
            },
            Vector::Constant(2, 0.5), o);
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("evaluation budget") {
        SimplexOptions o;
        o.max_evals = 37;
        o.tol = 0.0;
        int calls = 0;
        const SimplexResult r = nelder_mead(
            [&](const Vector& x) {
                ++calls;
                return std::sin(10 * x[0]) + x.squaredNorm();
            },
            Vector::Ones(2), o);
        CHECK(calls <= 37);
        CHECK(r.evals == calls);
    }
    SUBCASE("NaN treated as worst") {
        SimplexOptions o;
        o.max_evals = 400;
        const SimplexResult r = nelder_mead(
            [](const Vector& x) { return x[0] < -0.5 ? std::nan("") : (x[0] - 1.0) * (x[0] - 1.0); },
            Vector::Zero(1), o);
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    }
}

#include "kftune/benchmarks.hpp"
#include "kftune/statespace.hpp"

#include <doctest.h>

using namespace kftune;

TEST_CASE("benchmark catalogue") {
    const auto& names = benchmark_names();
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "tracking1d");
    CHECK(names[1] == "msd");
    CHECK(names[2] == "tracking2d");
    CHECK(names[3] == "cascade_msd");

    auto truth = [](const std::string& n) { return benchmark_spec(n).truth; };
    CHECK(truth("tracking1d") == (Vector(2) << 1, 0.1).finished());
    CHECK(truth("msd") == (Vector(2) << 1, 0.1).finished());
    CHECK(truth("tracking2d") == (Vector(4) << 1, 2, 0.2, 0.1).finished());
    CHECK(truth("cascade_msd") == (Vector(6) << 1, 2, 3, 0.2, 0.1, 0.15).finished());

    CHECK(benchmark_spec("tracking1d").dt_list == std::vector<double>{0.1, 0.5});
    CHECK(benchmark_spec("msd").dt_list == std::vector<double>{0.1, 0.5});
    CHECK(benchmark_spec("cascade_msd").dt_list.size() == 4);

    for (const auto& n : names) {
        const auto& s = benchmark_spec(n);
        const ContinuousModel m = build(n, s.truth);
        CHECK(static_cast<Eigen::Index>(s.free_params.size()) == m.noise_dim() + m.meas_dim());
        CHECK(s.search.contains(s.truth));
        CHECK(s.control.amplitude == 2.0);
        CHECK(s.control.frequency == 0.75);
    }
}

TEST_CASE("msd model") {
    const ContinuousModel m = build("msd", benchmark_spec("msd").truth);
    CHECK(m.A()(1, 0) == -1.0);
    CHECK(m.A()(1, 1) == doctest::Approx(-0.2));
    const Eigen::EigenSolver<Matrix> es(m.A());
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
    CHECK(m.V()(0, 0) == 1.0);
    CHECK(m.W()(0, 0) == 0.1);
}

TEST_CASE("cascade_msd model") {
    const ContinuousModel m = build("cascade_msd", benchmark_spec("cascade_msd").truth);
    REQUIRE(m.state_dim() == 6);
    REQUIRE(m.meas_dim() == 3);
    Vector row(6);
    row << -2, -0.4, 1, 0.2, 0, 0;
    CHECK((m.A().row(1).transpose() - row).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::EigenSolver<Matrix> es(m.A());
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
    CHECK(m.V().diagonal() == (Vector(3) << 1, 2, 3).finished());
    CHECK(m.W().diagonal() == (Vector(3) << 0.2, 0.1, 0.15).finished());
}

TEST_CASE("tracking2d model") {
    const ContinuousModel m = build("tracking2d", benchmark_spec("tracking2d").truth);
    CHECK(m.A()(0, 2) == 1.0);
    CHECK(m.A()(1, 3) == 1.0);
    CHECK(m.A().cwiseAbs().sum() == 2.0);
    CHECK(m.G() == (Matrix(4, 1) << 0, 0, 1, 1).finished());
    CHECK(m.H() == (Matrix(2, 4) << 1, 0, 0, 0, 0, 1, 0, 0).finished());
}

TEST_CASE("build errors") {
    CHECK_THROWS_AS(build("pendulum", Vector::Ones(2)), DomainError);
    CHECK_THROWS_AS(benchmark_spec("pendulum"), DomainError);
    CHECK_THROWS_AS(build("msd", Vector::Ones(3)), DimensionError);
    CHECK_THROWS_AS(build("msd", (Vector(2) << 1, 0).finished()), DomainError);
    CHECK_THROWS_AS(build("tracking2d", (Vector(4) << 1, -2, 0.2, 0.1).finished()), DomainError);
}

#include "kftune/tprocess.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace kftune;

namespace {

std::vector<Vector> random_points(std::mt19937_64& rng, int n, Eigen::Index d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vector> pts;
    for (int i = 0; i < n; ++i) {
        Vector p(d);
        for (Eigen::Index j = 0; j < d; ++j) p[j] = u(rng);
        pts.push_back(p);
    }
    return pts;
}

Vector random_values(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = g(rng);
    return y;
}

KernelParams random_kernel(std::mt19937_64& rng, Eigen::Index d, double jitter, double lmin = 0.15,
                           double lmax = 1.0) {
    std::uniform_real_distribution<double> u(lmin, lmax), s(0.5, 2.0);
    KernelParams k;
    k.lengthscales = Vector(d);
    for (Eigen::Index j = 0; j < d; ++j) k.lengthscales[j] = u(rng);
    k.signal_variance = s(rng);
    k.noise_jitter = jitter;
    return k;
}

double oracle_kernel(const KernelParams& k, const Vector& a, const Vector& b) {
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) r2 += std::pow((a[i] - b[i]) / k.lengthscales[i], 2);
    const double r = std::sqrt(r2);
    return k.signal_variance * (k.smoothness == MaternOrder::FiveHalves ? oracle::matern52(r) : oracle::matern32(r));
}

Matrix oracle_gram(const KernelParams& k, const std::vector<Vector>& pts, bool with_jitter) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = oracle_kernel(k, pts[i], pts[j]);
    if (with_jitter) K.diagonal().array() += k.noise_jitter;
    return K;
}

}  // namespace

TEST_CASE("kernel_eval") {
    std::mt19937_64 rng(1);
    for (MaternOrder order : {MaternOrder::FiveHalves, MaternOrder::ThreeHalves}) {
        KernelParams k = random_kernel(rng, 3, 1e-10);
        k.smoothness = order;
        const auto pts = random_points(rng, 20, 3);
        for (const auto& a : pts) {
            CHECK(kernel_eval(k, a, a) == doctest::Approx(k.signal_variance).epsilon(1e-15));
            for (const auto& b : pts) {
                CHECK(kernel_eval(k, a, b) == kernel_eval(k, b, a));
                CHECK(kernel_eval(k, a, b) == doctest::Approx(oracle_kernel(k, a, b)).epsilon(1e-13));
            }
        }
        Vector a = Vector::Zero(3);
        double prev = kernel_eval(k, a, a);
        for (double s = 0.05; s < 50.0; s *= 1.5) {
            const double v = kernel_eval(k, a, Vector::Constant(3, s));
            CHECK(v < prev);
            prev = v;
        }
        CHECK(prev < 1e-12);
    }
    SUBCASE("Gram matrices are PSD") {
        for (int t = 0; t < 20; ++t) {
            const KernelParams k = random_kernel(rng, 2, 1e-10);
            const Matrix K = kernel_matrix(k, random_points(rng, 30, 2));
            CHECK(K.isApprox(K.transpose(), 0.0));
            CHECK(min_eigenvalue(K) >= -1e-8);
        }
    }
    SUBCASE("validation") {
        KernelParams k;
        k.lengthscales = Vector::Ones(2);
        CHECK_NOTHROW(k.validate());
        k.noise_jitter = 1e-12;
        CHECK_THROWS_AS(k.validate(), DomainError);
        k.noise_jitter = 1e-6;
        k.lengthscales[1] = 0.0;
        CHECK_THROWS_AS(k.validate(), DomainError);
    }
}

TEST_CASE("posterior against the explicit-inverse oracle") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const int n = 3 + t % 6;
        const Eigen::Index d = 1 + t % 3;
        const auto pts = random_points(rng, n, d);
        const Vector y = random_values(rng, n);
        const KernelParams k = random_kernel(rng, d, 1e-4, 0.1, 0.5);
        const double nu = 3.0 + t % 5;
        const SurrogateState st(pts, y, k, nu, SurrogateMode::StudentT);
        const SurrogateState gp(pts, y, k, nu, SurrogateMode::Gaussian);

        const Vector q = random_points(rng, 1, d).front();
        Vector k21(n);
        for (int i = 0; i < n; ++i) k21[i] = oracle_kernel(k, q, pts[i]);
        const Matrix K11 = oracle_gram(k, pts, true);
        const auto ref = oracle::tp_posterior(K11, k21, k.signal_variance, y, nu, false);
        const auto ref_gp = oracle::tp_posterior(K11, k21, k.signal_variance, y, nu, true);

        const Prediction p = posterior(st, q);
        const Prediction g = posterior(gp, q);
        CHECK(std::abs(p.mean - ref.mean) <= 1e-10 * std::max(1.0, std::abs(ref.mean)));
        CHECK(std::abs(p.sigma - ref.sigma) <= 1e-10 * std::max(1.0, ref.sigma));
        CHECK(p.dof == nu + n);
        CHECK(std::abs(g.sigma - ref_gp.sigma) <= 1e-10 * std::max(1.0, ref_gp.sigma));
        CHECK(std::isinf(g.dof));

        CHECK(p.mean == g.mean);
        CHECK(st.mahalanobis() == doctest::Approx(y.dot(oracle::gauss_jordan_inverse(K11) * y)).epsilon(1e-10));
        CHECK(p.sigma == doctest::Approx(g.sigma * (nu + st.mahalanobis()) / (nu + n)).epsilon(1e-14));
    }
}

TEST_CASE("posterior limits") {
    std::mt19937_64 rng(3);
    const auto pts = random_points(rng, 6, 2);
    const Vector y = random_values(rng, 6);
    KernelParams k = random_kernel(rng, 2, 1e-10);
    const SurrogateState st(pts, y, k, 5.0, SurrogateMode::StudentT);

    SUBCASE("interpolation at an observed point") {
        const Prediction p = posterior(st, pts[2]);
        CHECK(p.mean == doctest::Approx(y[2]).epsilon(1e-6));
        CHECK(p.sigma >= 0.0);
        CHECK(p.sigma <= 1e-6);
    }
    SUBCASE("far away point") {
        const Prediction p = posterior(st, Vector::Constant(2, 1e6));
        CHECK(std::abs(p.mean) <= 1e-300);
        CHECK(p.sigma == doctest::Approx((5.0 + st.mahalanobis()) / (5.0 + 6.0) * k.signal_variance).epsilon(1e-14));
    }
    SUBCASE("scale depends on observed values") {
        const Vector q = (Vector(2) << 0.31, 0.77).finished();
        const SurrogateState scaled(pts, 3.0 * y, k, 5.0, SurrogateMode::StudentT);
        CHECK(scaled.mahalanobis() == doctest::Approx(9.0 * st.mahalanobis()).epsilon(1e-10));
        CHECK(posterior(scaled, q).sigma > posterior(st, q).sigma);
        const SurrogateState gp(pts, y, k, 5.0, SurrogateMode::Gaussian);
        const SurrogateState gp_scaled(pts, 3.0 * y, k, 5.0, SurrogateMode::Gaussian);
        CHECK(posterior(gp_scaled, q).sigma == posterior(gp, q).sigma);
    }
    SUBCASE("with_observation matches a fresh state") {
        const Vector q = (Vector(2) << 0.5, 0.5).finished();
        const SurrogateState a = st.with_observation(q, 0.25);
        auto pts2 = pts;
        pts2.push_back(q);
        Vector y2(7);
        y2 << y, 0.25;
        const SurrogateState b(pts2, y2, k, 5.0, SurrogateMode::StudentT);
        const Vector probe = (Vector(2) << 0.1, 0.9).finished();
        CHECK(posterior(a, probe).mean == doctest::Approx(posterior(b, probe).mean).epsilon(1e-12));
        CHECK(st.size() == 6);
        CHECK(a.size() == 7);
    }
    SUBCASE("construction errors") {
        CHECK_THROWS_AS(SurrogateState({}, Vector(0), k, 5.0, SurrogateMode::StudentT), DimensionError);
        CHECK_THROWS_AS(SurrogateState(pts, y.head(5), k, 5.0, SurrogateMode::StudentT), DimensionError);
        CHECK_THROWS_AS(SurrogateState(pts, y, k, 2.0, SurrogateMode::StudentT), DomainError);
        std::vector<Vector> dup{pts[0], pts[0]};
        KernelParams tiny = k;
        tiny.noise_jitter = 1e-10;
        CHECK_NOTHROW(SurrogateState(dup, Vector::Zero(2), tiny, 5.0, SurrogateMode::StudentT));
    }
}

TEST_CASE("log_marginal") {
    SUBCASE("single point, unit kernel") {
        KernelParams k;
        k.lengthscales = Vector::Ones(1);
        const SurrogateState s({Vector::Zero(1)}, Vector::Zero(1), k, 5.0, SurrogateMode::Gaussian);
        CHECK(log_marginal(s) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));
    }
    SUBCASE("explicit oracle") {
        std::mt19937_64 rng(4);
        for (int t = 0; t < 20; ++t) {
            const int n = 4;
            const auto pts = random_points(rng, n, 2);
            const Vector y = random_values(rng, n);
            const KernelParams k = random_kernel(rng, 2, 1e-6);
            const Matrix K = oracle_gram(k, pts, true);
            for (SurrogateMode mode : {SurrogateMode::StudentT, SurrogateMode::Gaussian}) {
                const SurrogateState s(pts, y, k, 4.5, mode);
                const double ref = oracle::tp_log_marginal(K, y, 4.5, mode == SurrogateMode::Gaussian);
                CHECK(std::abs(log_marginal(s) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
            }
        }
    }
    SUBCASE("large dof approaches the Gaussian") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 10; ++t) {
            const auto pts = random_points(rng, 5, 2);
            const KernelParams k = random_kernel(rng, 2, 1e-4, 0.05, 0.2);
            const Matrix L = oracle_gram(k, pts, true).llt().matrixL();
            const Vector y = L * random_values(rng, 5);
            const SurrogateState st(pts, y, k, 1e6, SurrogateMode::StudentT);
            const SurrogateState gp(pts, y, k, 1e6, SurrogateMode::Gaussian);
            CHECK(std::abs(log_marginal(st) - log_marginal(gp)) <= 1e-4);
        }
    }
}

TEST_CASE("fit_hyperparams") {
    SUBCASE("budget zero leaves the state unchanged") {
        std::mt19937_64 rng(6);
        const auto pts = random_points(rng, 8, 2);
        KernelParams k = random_kernel(rng, 2, 1e-6);
        const SurrogateState s(pts, random_values(rng, 8), k, 5.0, SurrogateMode::StudentT);
        const SurrogateState f = fit_hyperparams(s, 0);
        CHECK(f.kernel().lengthscales == s.kernel().lengthscales);
        CHECK(f.kernel().signal_variance == s.kernel().signal_variance);
        CHECK(log_marginal(f) == log_marginal(s));
    }
    SUBCASE("objective never decreases") {
        std::mt19937_64 rng(7);
        for (int t = 0; t < 10; ++t) {
            const auto pts = random_points(rng, 12, 2);
            const SurrogateState s(pts, random_values(rng, 12), random_kernel(rng, 2, 1e-6), 5.0,
                                   t % 2 ? SurrogateMode::Gaussian : SurrogateMode::StudentT);
            const SurrogateState f = fit_hyperparams(s, 200);
            CHECK(log_marginal(f) >= log_marginal(s) - 1e-12);
            CHECK_FALSE(f.fit_warning());
        }
    }
    SUBCASE("constant data lowers the signal variance") {
        std::mt19937_64 rng(8);
        const auto pts = random_points(rng, 10, 2);
        KernelParams k;
        k.lengthscales = Vector::Constant(2, 0.3);
        k.signal_variance = 1.0;
        k.noise_jitter = 1e-6;
        const SurrogateState s(pts, Vector::Constant(10, 0.5), k, 5.0, SurrogateMode::Gaussian);
        const SurrogateState f = fit_hyperparams(s, 300);
        CHECK(log_marginal(f) >= log_marginal(s));
        CHECK(f.kernel().signal_variance < 1.0);
    }
    SUBCASE("recovers a generating lengthscale") {
        std::mt19937_64 rng(9);
        const int n = 60;
        const auto pts = random_points(rng, n, 1);
        KernelParams truth;
        truth.lengthscales = Vector::Constant(1, 0.2);
        truth.signal_variance = 1.0;
        truth.noise_jitter = 1e-6;
        const Matrix K = oracle_gram(truth, pts, true);
        const Matrix L = K.llt().matrixL();
        const Vector y = L * random_values(rng, n);

        KernelParams start = truth;
        start.lengthscales[0] = 1.0;
        start.signal_variance = 0.3;
        const SurrogateState s(pts, y, start, 5.0, SurrogateMode::Gaussian);
        const SurrogateState f = fit_hyperparams(s, 400);
        CHECK(f.kernel().lengthscales[0] > 0.1);
        CHECK(f.kernel().lengthscales[0] < 0.4);
    }
}

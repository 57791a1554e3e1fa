#pragma once

// Independent reference implementations used only by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat naive_product(const Mat& a, const Mat& b) {
    Mat c = Mat::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

/// e^M by a truncated Taylor series with scaling by powers of two and repeated squaring.
inline Mat taylor_expm(const Mat& m) {
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    while (std::ldexp(norm, -s) > 0.25) ++s;
    const Mat a = std::ldexp(1.0, -s) * m;
    Mat term = Mat::Identity(m.rows(), m.cols());
    Mat sum = term;
    for (int k = 1; k < 60; ++k) {
        term = naive_product(term, a) / k;
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20) break;
    }
    for (int i = 0; i < s; ++i) sum = naive_product(sum, sum);
    return sum;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Mat gauss_jordan_inverse(Mat a) {
    const auto n = a.rows();
    Mat inv = Mat::Identity(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index piv = c;
        for (Eigen::Index r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0.0) throw std::runtime_error("singular");
        a.row(c).swap(a.row(piv));
        inv.row(c).swap(inv.row(piv));
        const double d = a(c, c);
        a.row(c) /= d;
        inv.row(c) /= d;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a(r, c);
            a.row(r) -= f * a.row(c);
            inv.row(r) -= f * inv.row(c);
        }
    }
    return inv;
}

/// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(Mat a) {
    const auto n = a.rows();
    double det = 1.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index piv = c;
        for (Eigen::Index r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (piv != c) {
            a.row(c).swap(a.row(piv));
            det = -det;
        }
        det *= a(c, c);
        for (Eigen::Index r = c + 1; r < n; ++r) a.row(r) -= (a(r, c) / a(c, c)) * a.row(c);
    }
    return det;
}

/// Adaptive Simpson quadrature of a scalar integrand.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double a0, double b0, double fa, double fm, double fb, double whole, double eps, int d) {
            const double m = 0.5 * (a0 + b0);
            const double lm = 0.5 * (a0 + m), rm = 0.5 * (m + b0);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a0) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b0 - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (d <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
            return rec(a0, m, fa, flm, fm, left, 0.5 * eps, d - 1) + rec(m, b0, fm, frm, fb, right, 0.5 * eps, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Adaptive Simpson applied entrywise to a matrix-valued integrand (shared subdivision).
inline Mat simpson_matrix(const std::function<Mat(double)>& f, double a, double b, double tol, int depth = 40) {
    std::function<Mat(double, double, const Mat&, const Mat&, const Mat&, const Mat&, double, int)> rec =
        [&](double a0, double b0, const Mat& fa, const Mat& fm, const Mat& fb, const Mat& whole, double eps, int d) -> Mat {
            const double m = 0.5 * (a0 + b0);
            const Mat flm = f(0.5 * (a0 + m)), frm = f(0.5 * (m + b0));
            const Mat left = (m - a0) / 6.0 * (fa + 4.0 * flm + fm);
            const Mat right = (b0 - m) / 6.0 * (fm + 4.0 * frm + fb);
            const Mat delta = left + right - whole;
            if (d <= 0 || delta.cwiseAbs().maxCoeff() <= 15.0 * eps) return left + right + delta / 15.0;
            return rec(a0, m, fa, flm, fm, left, 0.5 * eps, d - 1) + rec(m, b0, fm, frm, fb, right, 0.5 * eps, d - 1);
        };
    const Mat fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Regularized lower incomplete gamma P(a, x): series for x < a + 1, Lentz continued fraction otherwise.
inline double reg_lower_gamma(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 100000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17) break;
        }
        return sum * std::exp(log_prefix);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    return 1.0 - std::exp(log_prefix) * h;
}

inline double chi2_cdf(double k, double x) { return reg_lower_gamma(0.5 * k, 0.5 * x); }

/// Chi-square quantile by bisection on the CDF.
inline double chi2_quantile(double k, double p) {
    double lo = 0.0, hi = k + 10.0 * std::sqrt(2.0 * k) + 50.0;
    while (chi2_cdf(k, hi) < p) hi *= 2.0;
    for (int i = 0; i < 400 && hi - lo > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (chi2_cdf(k, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double t_pdf(double z, double nu) {
    const double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI);
    return std::exp(c - 0.5 * (nu + 1.0) * std::log1p(z * z / nu));
}

/// Student-t CDF by quadrature of the density from 0.
inline double t_cdf(double z, double nu) {
    const double half = simpson([nu](double t) { return t_pdf(t, nu); }, 0.0, std::abs(z), 1e-14);
    return z >= 0 ? 0.5 + half : 0.5 - half;
}

/// E[max(0, best - Y)], Y = u + scale * T_nu, by quadrature over w = best - Y >= 0 with the
/// substitution w = x / (1 - x). nu = inf gives the Gaussian case.
inline double ei_quadrature(double best, double u, double scale, double nu) {
    const double z = (best - u) / scale;
    auto dens = [nu](double t) {
        if (std::isinf(nu)) return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
        return t_pdf(t, nu);
    };
    auto integrand = [&](double x) {
        if (x >= 1.0) return 0.0;
        const double w = x / (1.0 - x);
        const double jac = 1.0 / ((1.0 - x) * (1.0 - x));
        return w * dens(z - w) * jac;
    };
    return scale * simpson(integrand, 0.0, 1.0 - 1e-12, 1e-15, 60);
}

inline double branin(double x1, double x2) {
    const double a = 1.0, b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI, r = 6.0, s = 10.0,
                 t = 1.0 / (8.0 * M_PI);
    const double q = x2 - b * x1 * x1 + c * x1 - r;
    return a * q * q + s * (1.0 - t) * std::cos(x1) + s;
}

/// Minimum of branin over [-5, 10] x [0, 15] on a 1000 x 1000 grid.
inline double branin_grid_min() {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i)
        for (int j = 0; j < 1000; ++j)
            best = std::min(best, branin(-5.0 + 15.0 * i / 999.0, 15.0 * j / 999.0));
    return best;
}

inline double matern52(double r) {
    const double s = std::sqrt(5.0) * r;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

inline double matern32(double r) {
    const double s = std::sqrt(3.0) * r;
    return (1.0 + s) * std::exp(-s);
}

/// Gauss-Jordan inverse in extended precision.
inline Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> gauss_jordan_inverse_ld_raw(const Mat& m) {
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    MatL a = m.cast<long double>();
    const auto n = a.rows();
    MatL inv = MatL::Identity(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index piv = c;
        for (Eigen::Index r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        a.row(c).swap(a.row(piv));
        inv.row(c).swap(inv.row(piv));
        const long double d = a(c, c);
        a.row(c) /= d;
        inv.row(c) /= d;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = a(r, c);
            a.row(r) -= f * a.row(c);
            inv.row(r) -= f * inv.row(c);
        }
    }
    return inv;
}

/// Student-t process prediction from explicit inverses.
struct TpPrediction {
    double mean, sigma, dof;
};

inline TpPrediction tp_posterior(const Mat& k11, const Vec& k21, double k22, const Vec& y, double nu, bool gaussian) {
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const auto inv = gauss_jordan_inverse_ld_raw(k11);
    const VecL yl = y.cast<long double>(), kl = k21.cast<long double>();
    const long double n = static_cast<long double>(y.size());
    const long double d = yl.dot(inv * yl);
    const long double mean = kl.dot(inv * yl);
    const long double base = static_cast<long double>(k22) - kl.dot(inv * kl);
    if (gaussian) return {static_cast<double>(mean), static_cast<double>(base), std::numeric_limits<double>::infinity()};
    return {static_cast<double>(mean), static_cast<double>((nu + d) / (nu + n) * base), nu + static_cast<double>(n)};
}

inline double tp_log_marginal(const Mat& k, const Vec& y, double nu, bool gaussian) {
    const double n = static_cast<double>(y.size());
    const double d = y.dot(gauss_jordan_inverse(k) * y);
    const double logdet = std::log(determinant(k));
    if (gaussian) return -0.5 * d - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);
    return std::lgamma(0.5 * (nu + n)) - std::lgamma(0.5 * nu) - 0.5 * n * std::log(nu * M_PI) - 0.5 * logdet -
           0.5 * (nu + n) * std::log1p(d / nu);
}

}  // namespace oracle

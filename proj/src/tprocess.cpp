#include "kftune/tprocess.hpp"

#include "kftune/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kftune {

void KernelParams::validate() const {
    if (lengthscales.size() == 0) throw DimensionError("kernel needs at least one lengthscale");
    if ((lengthscales.array() <= 0.0).any() || !lengthscales.allFinite()) {
        throw DomainError("kernel lengthscales must be positive");
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw DomainError("kernel signal variance must be positive");
    }
    if (!(noise_jitter >= 1e-10)) throw DomainError("kernel jitter must be >= 1e-10");
}

double kernel_eval(const KernelParams& p, const Vector& a, const Vector& b) {
    if (a.size() != p.lengthscales.size() || b.size() != p.lengthscales.size()) {
        throw DimensionError("kernel_eval: input dimension does not match lengthscales");
    }
    const double r = ((a - b).array() / p.lengthscales.array()).matrix().norm();
    switch (p.smoothness) {
        case MaternOrder::ThreeHalves: {
            const double s = std::sqrt(3.0) * r;
            return p.signal_variance * (1.0 + s) * std::exp(-s);
        }
        case MaternOrder::FiveHalves: {
            const double s = std::sqrt(5.0) * r;
            return p.signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
    }
    return 0.0;
}

Matrix kernel_matrix(const KernelParams& p, const std::vector<Vector>& points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = kernel_eval(p, points[i], points[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            K(i, j) = K(j, i) = kernel_eval(p, points[i], points[j]);
        }
    }
    return K;
}

SurrogateState::SurrogateState(std::vector<Vector> points, Vector values, KernelParams kernel,
                               double dof, SurrogateMode mode)
    : points_(std::move(points)),
      values_(std::move(values)),
      kernel_(std::move(kernel)),
      dof_(dof),
      mode_(mode) {
    if (points_.empty()) throw DimensionError("surrogate needs at least one observation");
    if (static_cast<Eigen::Index>(points_.size()) != values_.size()) {
        throw DimensionError("surrogate: point and value counts differ");
    }
    kernel_.validate();
    for (const auto& q : points_) {
        if (q.size() != kernel_.lengthscales.size()) {
            throw DimensionError("surrogate: point dimension does not match the kernel");
        }
    }
    if (!values_.allFinite()) throw DomainError("surrogate: observed values must be finite");
    if (mode_ == SurrogateMode::StudentT && !(dof_ > 2.0)) {
        throw DomainError("surrogate: Student-t dof must exceed 2");
    }

    Matrix K = kernel_matrix(kernel_, points_);
    K.diagonal().array() += kernel_.noise_jitter;
    chol_.compute(K);
    if (chol_.info() != Eigen::Success) {
        throw NumericalError("surrogate kernel matrix is not positive definite", K);
    }
    weights_ = chol_.solve(values_);
    mahalanobis_ = values_.dot(weights_);
    const Matrix& L = chol_.matrixLLT();
    log_det_ = 2.0 * L.diagonal().array().log().sum();
}

SurrogateState SurrogateState::with_kernel(KernelParams kernel) const {
    return SurrogateState(points_, values_, std::move(kernel), dof_, mode_);
}

SurrogateState SurrogateState::with_observation(const Vector& q, double y) const {
    auto points = points_;
    points.push_back(q);
    Vector values(values_.size() + 1);
    values << values_, y;
    return SurrogateState(std::move(points), std::move(values), kernel_, dof_, mode_);
}

SurrogateState SurrogateState::with_fit_warning(bool flag) const {
    SurrogateState copy = *this;
    copy.fit_warning_ = flag;
    return copy;
}

Prediction posterior(const SurrogateState& state, const Vector& q_new) {
    const auto n = state.size();
    Vector k21(n);
    for (Eigen::Index i = 0; i < n; ++i) k21[i] = kernel_eval(state.kernel(), state.points()[i], q_new);
    const double k22 = kernel_eval(state.kernel(), q_new, q_new);

    Prediction p;
    p.mean = k21.dot(state.weights());
    const Vector v = state.chol().matrixL().solve(k21);
    const double reduced = std::max(0.0, k22 - v.squaredNorm());
    double factor = 1.0;
    if (state.mode() == SurrogateMode::StudentT) {
        const double nu = state.dof();
        factor = (nu + state.mahalanobis()) / (nu + static_cast<double>(n));
        p.dof = nu + static_cast<double>(n);
    }
    const double floor = 1e-14 * state.kernel().signal_variance;
    p.sigma = std::max(factor * reduced, floor);
    return p;
}

double log_marginal(const SurrogateState& state) {
    const double n = static_cast<double>(state.size());
    const double d = state.mahalanobis();
    if (state.mode() == SurrogateMode::Gaussian) {
        return -0.5 * d - 0.5 * state.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
    }
    const double nu = state.dof();
    return std::lgamma(0.5 * (nu + n)) - std::lgamma(0.5 * nu) -
           0.5 * n * std::log(nu * std::numbers::pi) - 0.5 * state.log_det() -
           0.5 * (nu + n) * std::log1p(d / nu);
}

SurrogateState fit_hyperparams(const SurrogateState& state, int budget, const FitOptions& opts) {
    if (budget <= 0) return state;
    const auto d = state.input_dim();
    const KernelParams base = state.kernel();

    auto unpack = [&](const Vector& theta) {
        KernelParams k = base;
        k.lengthscales = theta.head(d).array().exp();
        k.signal_variance = std::exp(theta[d]);
        return k;
    };
    auto pack = [&](const KernelParams& k) {
        Vector theta(d + 1);
        theta.head(d) = k.lengthscales.array().log();
        theta[d] = std::log(k.signal_variance);
        return theta;
    };

    Vector lo(d + 1), hi(d + 1);
    lo.head(d).setConstant(std::log(opts.min_lengthscale));
    hi.head(d).setConstant(std::log(opts.max_lengthscale));
    lo[d] = std::log(opts.min_signal_variance);
    hi[d] = std::log(opts.max_signal_variance);

    auto negative_lml = [&](const Vector& theta) {
        try {
            return -log_marginal(state.with_kernel(unpack(theta)));
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<Vector> starts;
    starts.push_back(pack(base).cwiseMax(lo).cwiseMin(hi));
    for (double ls : {0.2, 0.5, 1.0, 0.1}) {
        if (static_cast<int>(starts.size()) >= std::max(1, opts.starts)) break;
        Vector t(d + 1);
        t.head(d).setConstant(std::log(ls));
        t[d] = 0.0;
        starts.push_back(t.cwiseMax(lo).cwiseMin(hi));
    }

    double best_value = negative_lml(pack(base));
    Vector best_theta = pack(base);
    bool any_finite = std::isfinite(best_value);

    const int per_start = std::max(1, budget / static_cast<int>(starts.size()));
    for (const Vector& start : starts) {
        SimplexOptions so;
        so.max_evals = per_start;
        so.initial_step = 0.5;
        so.tol = 1e-3;
        so.lower = lo;
        so.upper = hi;
        const SimplexResult r = nelder_mead(negative_lml, start, so);
        if (std::isfinite(r.f)) any_finite = true;
        if (r.f < best_value) {
            best_value = r.f;
            best_theta = r.x;
        }
    }
    if (!any_finite) return state.with_fit_warning(true);
    return state.with_kernel(unpack(best_theta));
}

}  // namespace kftune

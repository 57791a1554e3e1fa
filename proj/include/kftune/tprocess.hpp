#pragma once

#include "kftune/linalg.hpp"

#include <limits>
#include <vector>

namespace kftune {

enum class MaternOrder { ThreeHalves, FiveHalves };
enum class SurrogateMode { StudentT, Gaussian };

/// ARD Matern kernel on (normalized) inputs.
struct KernelParams {
    Vector lengthscales;
    double signal_variance = 1.0;
    MaternOrder smoothness = MaternOrder::FiveHalves;
    double noise_jitter = 1e-10;

    void validate() const;
};

/// signal_variance * matern(r),  r^2 = sum_i ((a_i - b_i) / l_i)^2
double kernel_eval(const KernelParams& p, const Vector& a, const Vector& b);

Matrix kernel_matrix(const KernelParams& p, const std::vector<Vector>& points);

/// Student-t (or Gaussian) process conditioned on observed costs, zero prior mean.
///
/// Immutable: every modification returns a new state with a refreshed factorization
/// of K + jitter I.
class SurrogateState {
public:
    SurrogateState(std::vector<Vector> points, Vector values, KernelParams kernel, double dof,
                   SurrogateMode mode);

    const std::vector<Vector>& points() const noexcept { return points_; }
    const Vector& values() const noexcept { return values_; }
    const KernelParams& kernel() const noexcept { return kernel_; }
    double dof() const noexcept { return dof_; }
    SurrogateMode mode() const noexcept { return mode_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    Eigen::Index input_dim() const noexcept { return points_.front().size(); }

    const Eigen::LLT<Matrix>& chol() const noexcept { return chol_; }
    /// K^{-1} y
    const Vector& weights() const noexcept { return weights_; }
    /// y^T K^{-1} y
    double mahalanobis() const noexcept { return mahalanobis_; }
    double log_det() const noexcept { return log_det_; }

    /// True when the most recent hyperparameter fit could not evaluate any candidate.
    bool fit_warning() const noexcept { return fit_warning_; }

    SurrogateState with_kernel(KernelParams kernel) const;
    SurrogateState with_observation(const Vector& q, double y) const;
    SurrogateState with_fit_warning(bool flag) const;

private:
    std::vector<Vector> points_;
    Vector values_;
    KernelParams kernel_;
    double dof_;
    SurrogateMode mode_;
    Eigen::LLT<Matrix> chol_;
    Vector weights_;
    double mahalanobis_ = 0.0;
    double log_det_ = 0.0;
    bool fit_warning_ = false;
};

/// Conditional distribution of y(q_new):
///   mean  = K21 K11^{-1} y
///   sigma = (v + d) / (v + n) * (K22 - K21 K11^{-1} K12),   d = y^T K11^{-1} y
///   dof   = v + n
/// `sigma` is the squared scale of the conditional Student-t. Gaussian mode drops the
/// (v + d) / (v + n) factor and reports an infinite dof.
struct Prediction {
    double mean = 0.0;
    double sigma = 0.0;
    double dof = std::numeric_limits<double>::infinity();
};

Prediction posterior(const SurrogateState& state, const Vector& q_new);

/// log MVT_n(y; v, 0, K) in Student-t mode, log N(y; 0, K) in Gaussian mode.
double log_marginal(const SurrogateState& state);

struct FitOptions {
    double min_lengthscale = 1e-2;
    double max_lengthscale = 1e1;
    double min_signal_variance = 1e-3;
    double max_signal_variance = 1e2;
    int starts = 4;
};

/// Maximizes log_marginal over log lengthscales and log signal variance with multi-start
/// downhill simplex inside the configured box, dof fixed. The current hyperparameters are
/// always a candidate, so the objective never decreases. budget is the total number of
/// objective evaluations; 0 leaves the state unchanged.
SurrogateState fit_hyperparams(const SurrogateState& state, int budget, const FitOptions& opts = {});

}  // namespace kftune

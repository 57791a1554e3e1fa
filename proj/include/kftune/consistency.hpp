#pragma once

#include "kftune/linalg.hpp"
#include "kftune/montecarlo.hpp"

#include <span>
#include <string>
#include <vector>

namespace kftune {

/// Run/time statistics of NEES and NIS over N Monte Carlo runs of T steps.
/// NEES fields are NaN and has_nees is false when no truth was available.
struct ConsistencyStats {
    std::vector<double> avg_nees_k;  // run average per step
    std::vector<double> avg_nis_k;
    double eps_x_tilde = 0.0;  // time mean of avg_nees_k
    double eps_z_tilde = 0.0;
    double S_x_tilde = 0.0;  // pooled variance, divisor T(N-1)
    double S_z_tilde = 0.0;
    int n_x = 0;
    int n_z = 0;
    int N = 0;
    int T = 0;
    bool has_nees = false;
};

struct ChiSquareBounds {
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;
    int dof_per_sample = 0;
    int N = 0;

    bool contains(double value) const { return value >= lower && value <= upper; }
};

enum class Reducer { Sum, Max };

enum class Verdict { Consistent, Pessimistic, Optimistic };

std::string to_string(Reducer r);
Reducer parse_reducer(const std::string& s);
std::string to_string(Verdict v);

/// e^T P^{-1} e via a Cholesky solve.
double nees(const Vector& error, const Matrix& cov);

/// eps^T S^{-1} eps via a Cholesky solve.
double nis(const Vector& innovation, const Matrix& innov_cov);

/// Per-step run averages, their time mean, and the pooled sample variance
///   S = 1/(T(N-1)) sum_k sum_i (eps_k^i - avg_eps_k)^2.
/// Requires N >= 2 runs of equal length.
ConsistencyStats aggregate(std::span<const NormalizedErrors> runs, int n_x, int n_z);
ConsistencyStats aggregate(std::span<const RunLog> logs);

/// Two-sided bounds on a run-averaged chi-square statistic: N * avg is chi-square with
/// N * dof degrees of freedom, so the bounds are its alpha/2 and 1 - alpha/2 quantiles over N.
ChiSquareBounds chi2_bounds(int dof, int N, double alpha);

/// |log(eps / dof)|
double j_metric(double eps_tilde, int dof);

/// |log(eps / dof)| + |log(S / (2 dof))|
double c_metric(double eps_tilde, double S_tilde, int dof);

/// |log(S / (2 dof))|
double v_metric(double S_tilde, int dof);

double multi_dt_cost(std::span<const double> per_dt_costs, Reducer reducer);

struct QuadFormMoments {
    double mean = 0.0;
    double var = 0.0;
};

/// Mean and variance of e^T L e for e ~ N(mu, Sigma):
///   mean = tr(L Sigma) + mu^T L mu,  var = 2 tr(L Sigma L Sigma) + 4 mu^T L Sigma L mu.
QuadFormMoments quad_form_moments(const Matrix& Lambda, const Matrix& Sigma, const Vector& mu);

/// Pessimistic when below the lower bound, optimistic when above the upper bound.
Verdict classify(double value, const ChiSquareBounds& bounds);

struct ConsistencyEntry {
    double dt = 0.0;
    ConsistencyStats stats;
    ChiSquareBounds nis_bounds;
    ChiSquareBounds nees_bounds;
    double j_nis = 0.0, c_nis = 0.0, v_nis = 0.0;
    double j_nees = 0.0, c_nees = 0.0, v_nees = 0.0;
    double nis_in_bounds = 0.0;   // fraction of steps with avg_nis_k inside the bounds
    double nees_in_bounds = 0.0;
    Verdict nis_verdict = Verdict::Consistent;
    Verdict nees_verdict = Verdict::Consistent;
    bool pass = false;
};

struct ConsistencyReport {
    std::vector<ConsistencyEntry> entries;
    double alpha = 0.05;
};

/// Metrics, bounds and verdicts for one interval. `pass` requires the time-averaged
/// statistics to sit inside their per-step bounds.
ConsistencyEntry make_entry(double dt, ConsistencyStats stats, double alpha);

}  // namespace kftune

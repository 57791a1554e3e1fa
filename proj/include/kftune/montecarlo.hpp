#pragma once

#include "kftune/kalman.hpp"
#include "kftune/linalg.hpp"
#include "kftune/statespace.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace kftune {

/// Counter-based generator: the n-th draw is splitmix64(key + n * golden_gamma), so a
/// stream is fully determined by its key and independent of execution order.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Keyed hash of (seed, a, b); used to derive independent stream keys.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Stable key for a sampling interval, so data for a given dt is shared across dt lists.
std::uint64_t dt_key(double dt) noexcept;

/// u(t) = amplitude * cos(frequency * t); amplitude 0 means no input.
struct ControlSignal {
    double amplitude = 0.0;
    double frequency = 0.0;

    double at(double t) const;
};

struct SimConfig {
    int n_runs = 120;
    int n_steps = 200;
    double dt = 0.1;
    std::uint64_t seed = 1;
    ControlSignal control;
    Vector x0;               // empty: zero initial state
    double p0_scale = 1e-4;  // P_{0|0} = p0_scale * I

    void validate() const;
};

/// Zero-order-hold input applied on step k (1-based): u(t_{k-1}), replicated over all inputs.
Vector control_input(const SimConfig& cfg, int k, Eigen::Index n_u);

struct TruthData {
    std::vector<Vector> states;        // x_1 .. x_T
    std::vector<Vector> measurements;  // z_1 .. z_T
};

struct StepRecord {
    Vector truth_state;
    StateEstimate estimate;
    InnovationRecord innovation;
    Vector measurement;
};

using RunLog = std::vector<StepRecord>;

/// NIS and NEES of one run, one entry per step. NEES is empty when no truth is available.
struct NormalizedErrors {
    std::vector<double> nis;
    std::vector<double> nees;
};

/// Square root factor L with L L^T = cov, after PSD clipping. Semidefinite input is
/// handled through an eigendecomposition.
Matrix noise_factor(const Matrix& cov);

/// Draws x_k = F x_{k-1} + B u_k + v_k, z_k = H x_k + w_k for k = 1..T.
/// Process and measurement noise use separate streams keyed on (seed, run_index).
TruthData simulate_truth(const DiscreteModel& truth_model, const SimConfig& cfg, int run_index);

/// Filters `data` with `filter_model`, starting from x_{0|0} = x0, P_{0|0} = p0_scale I.
RunLog run_filter(const TruthData& data, const DiscreteModel& filter_model, const SimConfig& cfg);

/// Same recursion as run_filter, keeping only the normalized errors.
NormalizedErrors run_filter_errors(const TruthData& data, const DiscreteModel& filter_model,
                                   const SimConfig& cfg, bool with_nees = true);

/// NIS-only filtering of externally supplied measurements.
std::vector<double> run_filter_nis(const std::vector<Vector>& measurements,
                                   const DiscreteModel& filter_model, const SimConfig& cfg);

/// Runs cfg.n_runs simulate/filter pairs; results are ordered by run index regardless of
/// how many worker threads are used.
std::vector<NormalizedErrors> monte_carlo_errors(const DiscreteModel& truth_model,
                                                 const DiscreteModel& filter_model,
                                                 const SimConfig& cfg, bool with_nees = true);

/// Worker threads used by Monte Carlo batches (default 1).
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace kftune

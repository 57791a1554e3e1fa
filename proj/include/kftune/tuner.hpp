#pragma once

#include "kftune/acquisition.hpp"
#include "kftune/consistency.hpp"
#include "kftune/montecarlo.hpp"
#include "kftune/tprocess.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kftune {

enum class CostKind { CNIS, JNIS, VNIS, CNEES };

std::string to_string(CostKind c);
CostKind parse_cost(const std::string& s);

/// A noise-intensity tuning problem on one of the benchmark systems.
struct TuneProblem {
    std::string system;
    Vector truth_params;
    SearchSpace search;
    std::vector<double> dt_list;
    CostKind cost = CostKind::CNIS;
    Reducer reducer = Reducer::Sum;
    SimConfig sim;  // template: dt and seed are overwritten per evaluation
    double penalty_cost = 50.0;
    bool log_space = true;  // surrogate / simplex coordinates are log-intensities

    /// Problem with the benchmark's ground truth, bounds, dt list and control input.
    static TuneProblem from_benchmark(const std::string& name);
    void validate() const;
};

struct CostBreakdown {
    std::vector<double> per_dt;
    std::vector<ConsistencyStats> stats;  // one per dt; empty entries after divergence
    double total = 0.0;
    bool diverged = false;
};

/// Evaluates the configured metric for every dt in the problem's list and reduces them.
/// The data for a given (seed, dt) pair is identical regardless of the rest of the list.
/// A filter failure (non-PD covariance) yields problem.penalty_cost.
CostBreakdown evaluate_cost_detailed(const TuneProblem& problem, const Vector& q, std::uint64_t seed);

double evaluate_cost(const TuneProblem& problem, const Vector& q, std::uint64_t seed);

/// Metric value of one interval from aggregated statistics.
double metric_value(CostKind cost, const ConsistencyStats& stats);

enum class TunerKind { TPBO, GPBO, NelderMead };

std::string to_string(TunerKind k);
TunerKind parse_tuner(const std::string& s);

struct TunerConfig {
    TunerKind kind = TunerKind::TPBO;
    int n_seed = 20;
    int n_iter = 70;
    double tol = 1e-4;
    int patience = 15;  // <= 0 disables the stall test
    double dof = 5.0;
    MaternOrder kernel = MaternOrder::FiveHalves;
    double jitter = 1e-6;
    int refit_every = 10;
    int fit_budget = 200;
    DirectConfig acquisition;
};

struct HistoryEntry {
    int iter = 0;
    std::string phase;  // seed | acquire | simplex
    Vector q;
    double y = 0.0;
    double best_so_far = 0.0;
    Vector lengthscales;  // surrogate hyperparameters at the time of the proposal
    double signal_variance = 0.0;
};

struct WallReport {
    double cost_seconds = 0.0;
    double fit_seconds = 0.0;
    double acquisition_seconds = 0.0;
};

struct TuneResult {
    std::string method;
    Vector q_star;
    double y_star = 0.0;
    std::vector<HistoryEntry> history;
    std::optional<SurrogateState> surrogate_final;
    WallReport wall_report;
    int divergences = 0;
};

/// Objective used by the optimizers: (q, per-sample seed) -> cost.
using SampleObjective = std::function<double(const Vector&, std::uint64_t)>;

/// Student-t (or Gaussian) process Bayesian optimization over a box:
/// space-filling seed design, then EI maximized by DIRECT on the surrogate posterior,
/// hyperparameters refitted every cfg.refit_every acquisitions.
TuneResult bayes_optimize(const SampleObjective& objective, const SearchSpace& space,
                          bool log_space, const TunerConfig& cfg, SurrogateMode mode,
                          std::uint64_t seed);

/// Bounded downhill simplex (reflection 1, expansion 1, contraction 0.5, shrink 0.5)
/// with an evaluation budget of cfg.n_seed + cfg.n_iter.
TuneResult simplex_optimize(const SampleObjective& objective, const SearchSpace& space,
                            bool log_space, const Vector& start, const TunerConfig& cfg,
                            std::uint64_t seed);

TuneResult tune_tpbo(const TuneProblem& problem, const TunerConfig& cfg, std::uint64_t seed);

/// GP surrogate, J_NIS cost, single dt = 0.1.
TuneResult tune_gpbo_baseline(const TuneProblem& problem, const TunerConfig& cfg, std::uint64_t seed);

TuneResult tune_nelder_mead(const TuneProblem& problem, const Vector& start, const TunerConfig& cfg,
                            std::uint64_t seed);

/// Dispatches on cfg.kind; the simplex start is drawn uniformly in the box from `seed`.
TuneResult run_tuner(const TuneProblem& problem, const TunerConfig& cfg, std::uint64_t seed);

/// Coordinates used by the optimizers: the unit cube, in log-intensity when log_space.
Vector to_search_coords(const SearchSpace& space, bool log_space, const Vector& q);
Vector from_search_coords(const SearchSpace& space, bool log_space, const Vector& u);

/// Points of a Halton sequence in [0,1]^d with a random (seeded) Cranley-Patterson shift.
std::vector<Vector> shifted_halton(int n, Eigen::Index d, std::uint64_t seed);

}  // namespace kftune

#include "kftune/tuner.hpp"

#include "kftune/benchmarks.hpp"
#include "kftune/simplex.hpp"
#include "kftune/statespace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace kftune {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSampleStream = 0x73616d70ULL;
constexpr std::uint64_t kDesignStream = 0x64657367ULL;
constexpr std::uint64_t kStartStream = 0x73746172ULL;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Standardized copies of the observed costs.
Vector standardize(const std::vector<double>& ys) {
    const auto n = static_cast<double>(ys.size());
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12)) sd = 1.0;
    Vector out(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < ys.size(); ++i) out[static_cast<Eigen::Index>(i)] = (ys[i] - mean) / sd;
    return out;
}

void record(TuneResult& res, int iter, const char* phase, const Vector& q, double y,
            const KernelParams* kernel) {
    HistoryEntry e;
    e.iter = iter;
    e.phase = phase;
    e.q = q;
    e.y = y;
    e.best_so_far = res.history.empty() ? y : std::min(res.history.back().best_so_far, y);
    if (kernel != nullptr) {
        e.lengthscales = kernel->lengthscales;
        e.signal_variance = kernel->signal_variance;
    }
    res.history.push_back(std::move(e));
}

void finalize(TuneResult& res) {
    const auto best = std::min_element(res.history.begin(), res.history.end(),
                                       [](const HistoryEntry& a, const HistoryEntry& b) { return a.y < b.y; });
    res.q_star = best->q;
    res.y_star = best->y;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(int index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * (index % base);
        index /= base;
        f /= base;
    }
    return result;
}

}  // namespace

std::string to_string(CostKind c) {
    switch (c) {
        case CostKind::CNIS: return "CNIS";
        case CostKind::JNIS: return "JNIS";
        case CostKind::VNIS: return "VNIS";
        case CostKind::CNEES: return "CNEES";
    }
    return "unknown";
}

CostKind parse_cost(const std::string& s) {
    if (s == "CNIS") return CostKind::CNIS;
    if (s == "JNIS") return CostKind::JNIS;
    if (s == "VNIS") return CostKind::VNIS;
    if (s == "CNEES") return CostKind::CNEES;
    throw DomainError("unknown cost '" + s + "' (expected CNIS, JNIS, VNIS or CNEES)");
}

std::string to_string(TunerKind k) {
    switch (k) {
        case TunerKind::TPBO: return "tpbo";
        case TunerKind::GPBO: return "gpbo";
        case TunerKind::NelderMead: return "nelder_mead";
    }
    return "unknown";
}

TunerKind parse_tuner(const std::string& s) {
    if (s == "tpbo") return TunerKind::TPBO;
    if (s == "gpbo") return TunerKind::GPBO;
    if (s == "nelder_mead") return TunerKind::NelderMead;
    throw DomainError("unknown tuner '" + s + "' (expected tpbo, gpbo or nelder_mead)");
}

TuneProblem TuneProblem::from_benchmark(const std::string& name) {
    const BenchmarkSpec& spec = benchmark_spec(name);
    TuneProblem p;
    p.system = name;
    p.truth_params = spec.truth;
    p.search = spec.search;
    p.dt_list = spec.dt_list;
    p.sim.control = spec.control;
    return p;
}

void TuneProblem::validate() const {
    const BenchmarkSpec& spec = benchmark_spec(system);
    const auto d = static_cast<Eigen::Index>(spec.free_params.size());
    if (truth_params.size() != d) throw DimensionError("truth_params has the wrong length for " + system);
    if (search.dim() != d) throw DimensionError("search bounds have the wrong length for " + system);
    if (dt_list.empty()) throw DomainError("dt_list must not be empty");
    for (double dt : dt_list) {
        if (!(dt > 0.0)) throw DomainError("dt_list entries must be positive");
    }
    if (log_space && (search.lower.array() <= 0.0).any()) {
        throw DomainError("log-space search needs positive lower bounds");
    }
    if (!(penalty_cost >= 0.0)) throw DomainError("penalty_cost must be non-negative");
    sim.validate();
}

double metric_value(CostKind cost, const ConsistencyStats& s) {
    switch (cost) {
        case CostKind::CNIS: return c_metric(s.eps_z_tilde, s.S_z_tilde, s.n_z);
        case CostKind::JNIS: return j_metric(s.eps_z_tilde, s.n_z);
        case CostKind::VNIS: return v_metric(s.S_z_tilde, s.n_z);
        case CostKind::CNEES: return c_metric(s.eps_x_tilde, s.S_x_tilde, s.n_x);
    }
    return 0.0;
}

CostBreakdown evaluate_cost_detailed(const TuneProblem& problem, const Vector& q, std::uint64_t seed) {
    const bool with_nees = problem.cost == CostKind::CNEES;
    const ContinuousModel truth = build(problem.system, problem.truth_params);
    const ContinuousModel candidate = build(problem.system, q);

    CostBreakdown out;
    for (double dt : problem.dt_list) {
        SimConfig cfg = problem.sim;
        cfg.dt = dt;
        cfg.seed = derive_key(seed, dt_key(dt));
        try {
            const DiscreteModel truth_d = discretize(truth, dt);
            const DiscreteModel filter_d = discretize(candidate, dt);
            const auto runs = monte_carlo_errors(truth_d, filter_d, cfg, with_nees);
            ConsistencyStats stats = aggregate(runs, static_cast<int>(truth_d.state_dim()),
                                               static_cast<int>(truth_d.meas_dim()));
            const double value = metric_value(problem.cost, stats);
            if (!std::isfinite(value)) throw NumericalError("non-finite metric");
            out.per_dt.push_back(value);
            out.stats.push_back(std::move(stats));
        } catch (const NumericalError&) {
            out.diverged = true;
        } catch (const DomainError&) {
            // zero NIS variance or similar degenerate statistics
            out.diverged = true;
        }
        if (out.diverged) break;
    }
    if (out.diverged) {
        out.total = problem.penalty_cost;
        return out;
    }
    out.total = multi_dt_cost(out.per_dt, problem.reducer);
    return out;
}

double evaluate_cost(const TuneProblem& problem, const Vector& q, std::uint64_t seed) {
    return evaluate_cost_detailed(problem, q, seed).total;
}

Vector to_search_coords(const SearchSpace& space, bool log_space, const Vector& q) {
    if (!log_space) return space.to_unit(q).cwiseMax(0.0).cwiseMin(1.0);
    const Vector lo = space.lower.array().log();
    const Vector hi = space.upper.array().log();
    const Vector lq = q.array().log();
    return ((lq - lo).array() / (hi - lo).array()).matrix().cwiseMax(0.0).cwiseMin(1.0);
}

Vector from_search_coords(const SearchSpace& space, bool log_space, const Vector& u) {
    if (!log_space) return space.from_unit(u);
    const Vector lo = space.lower.array().log();
    const Vector hi = space.upper.array().log();
    const Vector q = (lo + (u.array() * (hi - lo).array()).matrix()).array().exp();
    return q.cwiseMax(space.lower).cwiseMin(space.upper);
}

std::vector<Vector> shifted_halton(int n, Eigen::Index d, std::uint64_t seed) {
    if (d > static_cast<Eigen::Index>(std::size(kPrimes))) {
        throw DimensionError("shifted_halton supports at most 16 dimensions");
    }
    CounterRng rng(derive_key(seed, kDesignStream));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector shift(d);
    for (Eigen::Index j = 0; j < d; ++j) shift[j] = unit(rng);
    std::vector<Vector> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vector p(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double x = radical_inverse(i + 1, kPrimes[j]) + shift[j];
            p[j] = x - std::floor(x);
        }
        out.push_back(std::move(p));
    }
    return out;
}

TuneResult bayes_optimize(const SampleObjective& objective, const SearchSpace& space, bool log_space,
                          const TunerConfig& cfg, SurrogateMode mode, std::uint64_t seed) {
    if (cfg.n_seed < 2) throw DomainError("bayes_optimize: n_seed must be >= 2");
    if (cfg.n_iter < 0) throw DomainError("bayes_optimize: n_iter must be >= 0");
    const auto d = space.dim();
    const SearchSpace unit(Vector::Zero(d), Vector::Ones(d));

    TuneResult res;
    res.method = mode == SurrogateMode::StudentT ? "tpbo" : "gpbo";

    KernelParams kernel;
    kernel.lengthscales = Vector::Constant(d, 0.3);
    kernel.signal_variance = 1.0;
    kernel.smoothness = cfg.kernel;
    kernel.noise_jitter = cfg.jitter;
    const double dof = mode == SurrogateMode::StudentT ? cfg.dof : std::numeric_limits<double>::infinity();

    std::vector<Vector> us;
    std::vector<double> ys;
    int sample = 0;
    auto evaluate = [&](const Vector& u, const char* phase, const KernelParams* k) {
        const Vector q = from_search_coords(space, log_space, u);
        const auto t0 = Clock::now();
        const double y = objective(q, derive_key(seed, static_cast<std::uint64_t>(sample), kSampleStream));
        res.wall_report.cost_seconds += seconds_since(t0);
        us.push_back(to_search_coords(space, log_space, q));
        ys.push_back(y);
        record(res, sample, phase, q, y, k);
        ++sample;
    };

    for (const Vector& u : shifted_halton(cfg.n_seed, d, seed)) evaluate(u, "seed", &kernel);

    auto make_state = [&](const KernelParams& k) {
        try {
            return SurrogateState(us, standardize(ys), k, dof, mode);
        } catch (const NumericalError&) {
            KernelParams retry = k;
            retry.noise_jitter = std::max(k.noise_jitter, 1e-10) * 100.0;
            return SurrogateState(us, standardize(ys), retry, dof, mode);
        }
    };

    auto refit = [&](const SurrogateState& s) {
        const auto t0 = Clock::now();
        SurrogateState fitted = fit_hyperparams(s, cfg.fit_budget);
        res.wall_report.fit_seconds += seconds_since(t0);
        return fitted;
    };

    SurrogateState state = refit(make_state(kernel));
    kernel = state.kernel();

    int stall = 0;
    for (int it = 0; it < cfg.n_iter; ++it) {
        if (it > 0 && cfg.refit_every > 0 && it % cfg.refit_every == 0) {
            state = refit(state);
            kernel = state.kernel();
        }
        const Vector yst = state.values();
        const double best = yst.minCoeff();

        const auto t0 = Clock::now();
        auto ei = [&](const Vector& u) {
            const Prediction p = posterior(state, u);
            return expected_improvement(best, p.mean, std::sqrt(p.sigma), p.dof);
        };
        const DirectResult next = direct_maximize(ei, unit, cfg.acquisition);
        res.wall_report.acquisition_seconds += seconds_since(t0);

        const double best_before = res.history.back().best_so_far;
        evaluate(next.q_best, "acquire", &kernel);
        const double best_after = res.history.back().best_so_far;

        state = make_state(kernel);
        kernel = state.kernel();

        if (cfg.patience > 0) {
            stall = (best_before - best_after < cfg.tol) ? stall + 1 : 0;
            if (stall >= cfg.patience) break;
        }
    }

    res.surrogate_final = state;
    finalize(res);
    return res;
}

TuneResult simplex_optimize(const SampleObjective& objective, const SearchSpace& space, bool log_space,
                            const Vector& start, const TunerConfig& cfg, std::uint64_t seed) {
    if (!space.contains(start)) throw DomainError("simplex start lies outside the search box");
    const auto d = space.dim();
    TuneResult res;
    res.method = "nelder_mead";

    int sample = 0;
    auto f = [&](const Vector& u) {
        const Vector q = from_search_coords(space, log_space, u);
        const auto t0 = Clock::now();
        const double y = objective(q, derive_key(seed, static_cast<std::uint64_t>(sample), kSampleStream));
        res.wall_report.cost_seconds += seconds_since(t0);
        record(res, sample, "simplex", q, y, nullptr);
        ++sample;
        return y;
    };

    SimplexOptions opts;
    opts.reflection = 1.0;
    opts.expansion = 1.0;
    opts.contraction = 0.5;
    opts.shrink = 0.5;
    opts.max_evals = cfg.n_seed + cfg.n_iter;
    opts.tol = 1e-4;
    opts.initial_step = 0.1;
    opts.lower = Vector::Zero(d);
    opts.upper = Vector::Ones(d);
    nelder_mead(f, to_search_coords(space, log_space, start), opts);

    finalize(res);
    return res;
}

namespace {

SampleObjective problem_objective(const TuneProblem& problem, int* divergences) {
    return [&problem, divergences](const Vector& q, std::uint64_t s) {
        const CostBreakdown c = evaluate_cost_detailed(problem, q, s);
        if (c.diverged) ++*divergences;
        return c.total;
    };
}

}  // namespace

TuneResult tune_tpbo(const TuneProblem& problem, const TunerConfig& cfg, std::uint64_t seed) {
    problem.validate();
    int divergences = 0;
    TuneResult r = bayes_optimize(problem_objective(problem, &divergences), problem.search,
                                  problem.log_space, cfg, SurrogateMode::StudentT, seed);
    r.divergences = divergences;
    return r;
}

TuneResult tune_gpbo_baseline(const TuneProblem& problem, const TunerConfig& cfg, std::uint64_t seed) {
    TuneProblem p = problem;
    p.cost = CostKind::JNIS;
    p.dt_list = {0.1};
    p.validate();
    int divergences = 0;
    TuneResult r = bayes_optimize(problem_objective(p, &divergences), p.search, p.log_space, cfg,
                                  SurrogateMode::Gaussian, seed);
    r.divergences = divergences;
    return r;
}

TuneResult tune_nelder_mead(const TuneProblem& problem, const Vector& start, const TunerConfig& cfg,
                            std::uint64_t seed) {
    problem.validate();
    int divergences = 0;
    TuneResult r = simplex_optimize(problem_objective(problem, &divergences), problem.search,
                                    problem.log_space, start, cfg, seed);
    r.divergences = divergences;
    return r;
}

TuneResult run_tuner(const TuneProblem& problem, const TunerConfig& cfg, std::uint64_t seed) {
    switch (cfg.kind) {
        case TunerKind::TPBO: return tune_tpbo(problem, cfg, seed);
        case TunerKind::GPBO: return tune_gpbo_baseline(problem, cfg, seed);
        case TunerKind::NelderMead: {
            CounterRng rng(derive_key(seed, kStartStream));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            Vector u(problem.search.dim());
            for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unit(rng);
            return tune_nelder_mead(problem, from_search_coords(problem.search, problem.log_space, u),
                                    cfg, seed);
        }
    }
    throw DomainError("unknown tuner kind");
}

}  // namespace kftune

#include "kftune/cli.hpp"

#include "kftune/benchmarks.hpp"
#include "kftune/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kftune::cli {

namespace {

RunConfig load(const Options& opts) {
    RunConfig rc = load_config(opts.config_path);
    if (opts.seed) {
        rc.seed = *opts.seed;
        rc.problem.sim.seed = *opts.seed;
    }
    set_thread_count(opts.threads);
    return rc;
}

template <class Fn>
int guarded(const Options& opts, std::ostream& log, Fn&& fn) {
    try {
        return fn(load(opts));
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

std::vector<Vector> grid_points(const RunConfig& rc) {
    const auto& spec = benchmark_spec(rc.problem.system);
    std::vector<Vector> points{rc.problem.truth_params};
    for (const auto& axis : rc.sweep.axes) {
        const auto idx = static_cast<Eigen::Index>(
            std::find(spec.free_params.begin(), spec.free_params.end(), axis.param) - spec.free_params.begin());
        std::vector<Vector> next;
        for (const auto& p : points) {
            for (double v : axis.values()) {
                Vector q = p;
                q[idx] = v;
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

std::string run_label(TunerKind kind, int repeat, bool nested) {
    if (!nested) return "";
    return to_string(kind) + "_r" + std::to_string(repeat);
}

}  // namespace

CsvTable run_sweep(const RunConfig& rc, std::uint64_t seed) {
    const auto& spec = benchmark_spec(rc.problem.system);
    CsvTable t;
    t.header = spec.free_params;
    t.header.insert(t.header.end(), {"dt", "cost", "log10cost"});

    const bool per_dt = rc.sweep.mode != SweepMode::Reduced;
    const bool reduced = rc.sweep.mode != SweepMode::PerDt;
    for (const auto& q : grid_points(rc)) {
        const CostBreakdown b = evaluate_cost_detailed(rc.problem, q, seed);
        auto row = [&](const std::string& dt_label, double cost) {
            std::vector<std::string> r;
            for (Eigen::Index i = 0; i < q.size(); ++i) r.push_back(format_double(q[i]));
            r.push_back(dt_label);
            r.push_back(format_double(cost));
            r.push_back(format_double(std::log10(cost)));
            t.rows.push_back(std::move(r));
        };
        if (per_dt) {
            for (std::size_t i = 0; i < rc.problem.dt_list.size(); ++i) {
                const double c = i < b.per_dt.size() ? b.per_dt[i] : rc.problem.penalty_cost;
                row(format_double(rc.problem.dt_list[i]), c);
            }
        }
        if (reduced) row(to_string(rc.problem.reducer), b.total);
    }
    return t;
}

CheckOutput run_check(const RunConfig& rc, std::uint64_t seed) {
    const TuneProblem& p = rc.problem;
    const Vector params = rc.check.params.value_or(p.truth_params);
    const ContinuousModel truth = build(p.system, p.truth_params);
    const ContinuousModel filter = build(p.system, params);

    CheckOutput out;
    out.report.alpha = rc.check.alpha;
    out.steps_dt = rc.check.dt.value_or(p.dt_list.front());

    std::vector<double> dts = p.dt_list;
    if (std::find(dts.begin(), dts.end(), out.steps_dt) == dts.end()) dts.push_back(out.steps_dt);

    for (double dt : dts) {
        SimConfig cfg = p.sim;
        cfg.dt = dt;
        cfg.seed = derive_key(seed, dt_key(dt));
        const DiscreteModel truth_d = discretize(truth, dt);
        const DiscreteModel filter_d = discretize(filter, dt);

        if (dt != out.steps_dt) {
            const auto runs = monte_carlo_errors(truth_d, filter_d, cfg, true);
            out.report.entries.push_back(make_entry(dt, aggregate(runs, static_cast<int>(truth_d.state_dim()),
                                                                  static_cast<int>(truth_d.meas_dim())),
                                                    rc.check.alpha));
            continue;
        }

        std::vector<RunLog> logs(static_cast<std::size_t>(cfg.n_runs));
        parallel_for(cfg.n_runs, [&](int r) {
            logs[static_cast<std::size_t>(r)] = run_filter(simulate_truth(truth_d, cfg, r), filter_d, cfg);
        });
        const ConsistencyStats stats = aggregate(logs);
        const auto n_x = truth_d.state_dim();
        const int T = cfg.n_steps;

        std::vector<long> inside(static_cast<std::size_t>(n_x), 0);
        for (const auto& log : logs) {
            for (const auto& s : log) {
                const Vector e = s.truth_state - s.estimate.mean;
                for (Eigen::Index i = 0; i < n_x; ++i) {
                    if (std::abs(e[i]) <= 2.0 * std::sqrt(s.estimate.cov(i, i))) ++inside[static_cast<std::size_t>(i)];
                }
            }
        }
        for (long c : inside) out.two_sigma_fraction.push_back(static_cast<double>(c) / (static_cast<double>(cfg.n_runs) * T));

        const ChiSquareBounds nis_b = chi2_bounds(static_cast<int>(truth_d.meas_dim()), stats.N, rc.check.alpha);
        const ChiSquareBounds nees_b = chi2_bounds(static_cast<int>(n_x), stats.N, rc.check.alpha);
        auto& t = out.steps;
        t.header = {"k", "t", "avg_nis", "nis_lower", "nis_upper", "avg_nees", "nees_lower", "nees_upper"};
        for (Eigen::Index i = 0; i < n_x; ++i) t.header.push_back("err_" + std::to_string(i));
        for (Eigen::Index i = 0; i < n_x; ++i) t.header.push_back("two_sigma_" + std::to_string(i));
        for (int k = 0; k < T; ++k) {
            const auto& s = logs.front()[static_cast<std::size_t>(k)];
            std::vector<std::string> r{std::to_string(k + 1), format_double((k + 1) * dt),
                                       format_double(stats.avg_nis_k[static_cast<std::size_t>(k)]),
                                       format_double(nis_b.lower), format_double(nis_b.upper),
                                       format_double(stats.avg_nees_k[static_cast<std::size_t>(k)]),
                                       format_double(nees_b.lower), format_double(nees_b.upper)};
            const Vector e = s.truth_state - s.estimate.mean;
            for (Eigen::Index i = 0; i < n_x; ++i) r.push_back(format_double(e[i]));
            for (Eigen::Index i = 0; i < n_x; ++i) r.push_back(format_double(2.0 * std::sqrt(s.estimate.cov(i, i))));
            t.rows.push_back(std::move(r));
        }
        out.report.entries.push_back(make_entry(dt, stats, rc.check.alpha));
    }
    return out;
}

int cmd_tune(const Options& opts, std::ostream& log) {
    return guarded(opts, log, [&](const RunConfig& rc) {
        const auto& names = benchmark_spec(rc.problem.system).free_params;
        const bool nested = rc.tuners.size() > 1 || rc.repeats > 1;
        CsvTable summary;
        summary.header = {"tuner", "repeat", "seed"};
        summary.header.insert(summary.header.end(), names.begin(), names.end());
        summary.header.push_back("y_star");

        for (int r = 0; r < rc.repeats; ++r) {
            const std::uint64_t seed = rc.repeats == 1 ? rc.seed : derive_key(rc.seed, static_cast<std::uint64_t>(r));
            for (TunerKind kind : rc.tuners) {
                TunerConfig cfg = rc.tuner;
                cfg.kind = kind;
                const TuneResult res = run_tuner(rc.problem, cfg, seed);
                const auto dir = rc.output_dir / run_label(kind, r, nested);
                write_text(dir / "result.json", to_json(res, rc.problem, names).dump(2) + "\n");
                write_text(dir / "history.csv", to_csv(history_table(res, names)));

                std::vector<std::string> row{to_string(kind), std::to_string(r), std::to_string(seed)};
                for (Eigen::Index i = 0; i < res.q_star.size(); ++i) row.push_back(format_double(res.q_star[i]));
                row.push_back(format_double(res.y_star));
                summary.rows.push_back(std::move(row));

                if (!opts.quiet) {
                    log << to_string(kind) << " repeat " << r << ": y* = " << format_double(res.y_star) << ", q* =";
                    for (Eigen::Index i = 0; i < res.q_star.size(); ++i) log << ' ' << format_double(res.q_star[i]);
                    log << " (" << res.history.size() << " evaluations)\n";
                }
            }
        }
        if (nested) write_text(rc.output_dir / "summary.csv", to_csv(summary));
        return 0;
    });
}

int cmd_sweep(const Options& opts, std::ostream& log) {
    return guarded(opts, log, [&](const RunConfig& rc) {
        const CsvTable t = run_sweep(rc, rc.seed);
        write_text(rc.output_dir / "sweep.csv", to_csv(t));
        if (!opts.quiet) log << "sweep: " << t.rows.size() << " rows -> " << (rc.output_dir / "sweep.csv").string() << '\n';
        return 0;
    });
}

int cmd_check(const Options& opts, std::ostream& log) {
    return guarded(opts, log, [&](const RunConfig& rc) {
        const CheckOutput out = run_check(rc, rc.seed);
        nlohmann::json j = to_json(out.report);
        j["steps_dt"] = out.steps_dt;
        j["two_sigma_fraction"] = out.two_sigma_fraction;
        write_text(rc.output_dir / "consistency.json", j.dump(2) + "\n");
        write_text(rc.output_dir / "steps.csv", to_csv(out.steps));
        if (!opts.quiet) {
            for (const auto& e : out.report.entries) {
                log << "dt " << e.dt << ": NIS " << to_string(e.nis_verdict) << " (eps_z " << e.stats.eps_z_tilde
                    << ", S_z " << e.stats.S_z_tilde << ", C " << e.c_nis << "), NEES " << to_string(e.nees_verdict)
                    << (e.pass ? ", pass\n" : ", fail\n");
            }
        }
        bool all_pass = true;
        for (const auto& e : out.report.entries) all_pass = all_pass && e.pass;
        return all_pass ? 0 : 2;
    });
}

int cmd_list_systems(std::ostream& out) {
    for (const auto& name : benchmark_names()) {
        const auto& s = benchmark_spec(name);
        out << name << ": " << s.description << " [";
        for (std::size_t i = 0; i < s.free_params.size(); ++i) out << (i ? ", " : "") << s.free_params[i];
        out << "]\n";
    }
    return 0;
}

}  // namespace kftune::cli

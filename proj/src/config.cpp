#include "kftune/config.hpp"

#include "kftune/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace kftune {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

Vector get_vector(const json& j, const char* key, const std::string& where) {
    const auto v = get<std::vector<double>>(j, key, where);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_length(const Vector& v, Eigen::Index n, const std::string& what) {
    if (v.size() != n) {
        throw ConfigError(what + ": expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
    }
}

MaternOrder parse_kernel(const std::string& s) {
    if (s == "matern52") return MaternOrder::FiveHalves;
    if (s == "matern32") return MaternOrder::ThreeHalves;
    throw ConfigError("tuner.kernel: expected matern52 or matern32, got '" + s + "'");
}

SweepMode parse_mode(const std::string& s) {
    if (s == "per_dt") return SweepMode::PerDt;
    if (s == "reduced") return SweepMode::Reduced;
    if (s == "both") return SweepMode::Both;
    throw ConfigError("sweep.mode: expected per_dt, reduced or both, got '" + s + "'");
}

void parse_sim(const json& j, RunConfig& rc, Eigen::Index n_x) {
    require_keys(j, "sim", {"n_runs", "n_steps", "seed", "x0", "p0_scale", "control"});
    auto& sim = rc.problem.sim;
    if (j.contains("n_runs")) sim.n_runs = get<int>(j, "n_runs", "sim");
    if (j.contains("n_steps")) sim.n_steps = get<int>(j, "n_steps", "sim");
    if (j.contains("seed")) rc.seed = get<std::uint64_t>(j, "seed", "sim");
    if (j.contains("x0")) {
        sim.x0 = get_vector(j, "x0", "sim");
        require_length(sim.x0, n_x, "sim.x0");
    }
    if (j.contains("p0_scale")) sim.p0_scale = get<double>(j, "p0_scale", "sim");
    if (j.contains("control")) {
        const auto& c = j.at("control");
        require_keys(c, "sim.control", {"amplitude", "frequency"});
        if (c.contains("amplitude")) sim.control.amplitude = get<double>(c, "amplitude", "sim.control");
        if (c.contains("frequency")) sim.control.frequency = get<double>(c, "frequency", "sim.control");
    }
}

void parse_tuner_section(const json& j, RunConfig& rc) {
    require_keys(j, "tuner", {"kind", "n_seed", "n_iter", "tol", "patience", "dof", "kernel", "penalty_cost",
                              "jitter", "refit_every", "fit_budget", "acq_evals", "log_space", "repeats"});
    auto& t = rc.tuner;
    if (j.contains("kind")) {
        const auto& k = j.at("kind");
        rc.tuners.clear();
        try {
            if (k.is_array()) {
                for (const auto& e : k) rc.tuners.push_back(parse_tuner(e.get<std::string>()));
            } else {
                rc.tuners.push_back(parse_tuner(k.get<std::string>()));
            }
        } catch (const std::exception& e) {
            throw ConfigError(std::string("tuner.kind: ") + e.what());
        }
        if (rc.tuners.empty()) throw ConfigError("tuner.kind: empty list");
        t.kind = rc.tuners.front();
    }
    if (j.contains("n_seed")) t.n_seed = get<int>(j, "n_seed", "tuner");
    if (j.contains("n_iter")) t.n_iter = get<int>(j, "n_iter", "tuner");
    if (j.contains("tol")) t.tol = get<double>(j, "tol", "tuner");
    if (j.contains("patience")) t.patience = get<int>(j, "patience", "tuner");
    if (j.contains("dof")) t.dof = get<double>(j, "dof", "tuner");
    if (j.contains("kernel")) t.kernel = parse_kernel(get<std::string>(j, "kernel", "tuner"));
    if (j.contains("penalty_cost")) rc.problem.penalty_cost = get<double>(j, "penalty_cost", "tuner");
    if (j.contains("jitter")) t.jitter = get<double>(j, "jitter", "tuner");
    if (j.contains("refit_every")) t.refit_every = get<int>(j, "refit_every", "tuner");
    if (j.contains("fit_budget")) t.fit_budget = get<int>(j, "fit_budget", "tuner");
    if (j.contains("acq_evals")) t.acquisition.max_evals = get<int>(j, "acq_evals", "tuner");
    if (j.contains("log_space")) rc.problem.log_space = get<bool>(j, "log_space", "tuner");
    if (j.contains("repeats")) rc.repeats = get<int>(j, "repeats", "tuner");

    if (t.n_seed < 2) throw ConfigError("tuner.n_seed must be at least 2");
    if (t.n_iter < 0) throw ConfigError("tuner.n_iter must be non-negative");
    if (!(t.tol >= 0.0)) throw ConfigError("tuner.tol must be non-negative");
    if (!(t.dof > 2.0)) throw ConfigError("tuner.dof must exceed 2");
    if (!(t.jitter >= 1e-10)) throw ConfigError("tuner.jitter must be at least 1e-10");
    if (t.refit_every < 1) throw ConfigError("tuner.refit_every must be positive");
    if (t.fit_budget < 0) throw ConfigError("tuner.fit_budget must be non-negative");
    if (t.acquisition.max_evals < 1) throw ConfigError("tuner.acq_evals must be positive");
    if (rc.repeats < 1) throw ConfigError("tuner.repeats must be positive");
}

void parse_sweep(const json& j, RunConfig& rc, const BenchmarkSpec& spec) {
    require_keys(j, "sweep", {"axes", "mode"});
    if (j.contains("mode")) rc.sweep.mode = parse_mode(get<std::string>(j, "mode", "sweep"));
    if (!j.contains("axes")) return;
    const auto& axes = j.at("axes");
    if (!axes.is_array()) throw ConfigError("sweep.axes: expected an array");
    for (const auto& a : axes) {
        require_keys(a, "sweep.axes[]", {"param", "lower", "upper", "n", "scale"});
        SweepAxis ax;
        ax.param = get<std::string>(a, "param", "sweep.axes[]");
        ax.lower = get<double>(a, "lower", "sweep.axes[]");
        ax.upper = get<double>(a, "upper", "sweep.axes[]");
        ax.n = get<int>(a, "n", "sweep.axes[]");
        if (a.contains("scale")) {
            const auto s = get<std::string>(a, "scale", "sweep.axes[]");
            if (s != "linear" && s != "log") throw ConfigError("sweep.axes[].scale: expected linear or log");
            ax.log_scale = s == "log";
        }
        if (std::find(spec.free_params.begin(), spec.free_params.end(), ax.param) == spec.free_params.end()) {
            throw ConfigError("sweep.axes[].param: '" + ax.param + "' is not a parameter of " + spec.name);
        }
        for (const auto& other : rc.sweep.axes) {
            if (other.param == ax.param) throw ConfigError("sweep.axes: duplicate axis '" + ax.param + "'");
        }
        if (ax.n < 1) throw ConfigError("sweep.axes[].n must be positive");
        if (!(ax.lower > 0.0) || !(ax.upper >= ax.lower)) {
            throw ConfigError("sweep.axes[]: need 0 < lower <= upper");
        }
        rc.sweep.axes.push_back(ax);
    }
}

void parse_check(const json& j, RunConfig& rc, Eigen::Index n_params) {
    require_keys(j, "check", {"params", "dt", "alpha"});
    if (j.contains("params")) {
        Vector p = get_vector(j, "params", "check");
        require_length(p, n_params, "check.params");
        if ((p.array() <= 0.0).any()) throw ConfigError("check.params must be positive");
        rc.check.params = p;
    }
    if (j.contains("dt")) {
        const double dt = get<double>(j, "dt", "check");
        if (!(dt > 0.0)) throw ConfigError("check.dt must be positive");
        rc.check.dt = dt;
    }
    if (j.contains("alpha")) rc.check.alpha = get<double>(j, "alpha", "check");
    if (!(rc.check.alpha > 0.0 && rc.check.alpha < 1.0)) throw ConfigError("check.alpha must lie in (0, 1)");
}

}  // namespace

std::vector<double> SweepAxis::values() const {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out[static_cast<std::size_t>(i)] = log_scale ? std::exp(std::log(lower) + s * (std::log(upper) - std::log(lower)))
                                                     : lower + s * (upper - lower);
    }
    return out;
}

RunConfig parse_config(const json& j) {
    require_keys(j, "config", {"system", "truth_params", "search", "dt_list", "reducer", "cost", "sim", "tuner",
                               "sweep", "check", "output_dir"});
    if (!j.contains("system")) throw ConfigError("config: missing required key 'system'");
    const auto system = get<std::string>(j, "system", "config");

    const BenchmarkSpec* spec = nullptr;
    try {
        spec = &benchmark_spec(system);
    } catch (const std::exception& e) {
        throw ConfigError("config.system: " + std::string(e.what()));
    }

    RunConfig rc;
    rc.problem = TuneProblem::from_benchmark(system);
    rc.tuners = {rc.tuner.kind};
    rc.seed = rc.problem.sim.seed;
    const auto n_params = static_cast<Eigen::Index>(spec->free_params.size());

    if (j.contains("truth_params")) {
        rc.problem.truth_params = get_vector(j, "truth_params", "config");
        require_length(rc.problem.truth_params, n_params, "truth_params");
    }
    if (j.contains("search")) {
        const auto& s = j.at("search");
        require_keys(s, "search", {"lower", "upper"});
        Vector lo = s.contains("lower") ? get_vector(s, "lower", "search") : rc.problem.search.lower;
        Vector hi = s.contains("upper") ? get_vector(s, "upper", "search") : rc.problem.search.upper;
        require_length(lo, n_params, "search.lower");
        require_length(hi, n_params, "search.upper");
        try {
            rc.problem.search = SearchSpace(lo, hi);
        } catch (const std::exception& e) {
            throw ConfigError("search: " + std::string(e.what()));
        }
    }
    if (j.contains("dt_list")) rc.problem.dt_list = get<std::vector<double>>(j, "dt_list", "config");
    try {
        if (j.contains("reducer")) rc.problem.reducer = parse_reducer(get<std::string>(j, "reducer", "config"));
        if (j.contains("cost")) rc.problem.cost = parse_cost(get<std::string>(j, "cost", "config"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("sim")) parse_sim(j.at("sim"), rc, build(system, rc.problem.truth_params).state_dim());
    if (j.contains("tuner")) parse_tuner_section(j.at("tuner"), rc);
    if (j.contains("sweep")) parse_sweep(j.at("sweep"), rc, *spec);
    if (j.contains("check")) parse_check(j.at("check"), rc, n_params);
    if (j.contains("output_dir")) rc.output_dir = get<std::string>(j, "output_dir", "config");

    rc.problem.sim.seed = rc.seed;
    try {
        rc.problem.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace kftune

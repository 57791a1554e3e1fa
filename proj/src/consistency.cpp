#include "kftune/consistency.hpp"

#include "kftune/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kftune {

namespace {

double quadratic_solve(const Vector& v, const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() != v.size()) {
        throw DimensionError(std::string(what) + ": dimension mismatch");
    }
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(what) + ": covariance is not positive definite", m);
    }
    const Vector w = llt.matrixL().solve(v);
    return w.squaredNorm();
}

// Run averages per step, their time mean and the pooled variance around the run averages.
void pool(const std::vector<const std::vector<double>*>& series, std::vector<double>& avg_k,
          double& eps_tilde, double& s_tilde) {
    const std::size_t N = series.size();
    const std::size_t T = series.front()->size();
    avg_k.assign(T, 0.0);
    for (const auto* run : series) {
        for (std::size_t k = 0; k < T; ++k) avg_k[k] += (*run)[k];
    }
    for (double& a : avg_k) a /= static_cast<double>(N);

    double total = 0.0;
    for (double a : avg_k) total += a;
    eps_tilde = total / static_cast<double>(T);

    double ss = 0.0;
    for (const auto* run : series) {
        for (std::size_t k = 0; k < T; ++k) {
            const double d = (*run)[k] - avg_k[k];
            ss += d * d;
        }
    }
    s_tilde = ss / (static_cast<double>(T) * static_cast<double>(N - 1));
}

double abs_log_ratio(double value, double reference, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
    return std::abs(std::log(value / reference));
}

}  // namespace

std::string to_string(Reducer r) { return r == Reducer::Sum ? "sum" : "max"; }

Reducer parse_reducer(const std::string& s) {
    if (s == "sum") return Reducer::Sum;
    if (s == "max") return Reducer::Max;
    throw DomainError("unknown reducer '" + s + "' (expected sum or max)");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Pessimistic: return "pessimistic";
        case Verdict::Optimistic: return "optimistic";
    }
    return "unknown";
}

double nees(const Vector& error, const Matrix& cov) { return quadratic_solve(error, cov, "nees"); }

double nis(const Vector& innovation, const Matrix& innov_cov) {
    return quadratic_solve(innovation, innov_cov, "nis");
}

ConsistencyStats aggregate(std::span<const NormalizedErrors> runs, int n_x, int n_z) {
    if (runs.size() < 2) throw DomainError("aggregate: at least two runs are needed for a variance");
    const std::size_t T = runs.front().nis.size();
    if (T == 0) throw DomainError("aggregate: runs are empty");
    bool has_nees = !runs.front().nees.empty();
    for (const auto& r : runs) {
        if (r.nis.size() != T) throw DimensionError("aggregate: runs differ in length");
        if (has_nees && r.nees.size() != T) has_nees = false;
    }

    ConsistencyStats s;
    s.n_x = n_x;
    s.n_z = n_z;
    s.N = static_cast<int>(runs.size());
    s.T = static_cast<int>(T);

    std::vector<const std::vector<double>*> series;
    series.reserve(runs.size());
    for (const auto& r : runs) series.push_back(&r.nis);
    pool(series, s.avg_nis_k, s.eps_z_tilde, s.S_z_tilde);

    s.has_nees = has_nees;
    if (has_nees) {
        series.clear();
        for (const auto& r : runs) series.push_back(&r.nees);
        pool(series, s.avg_nees_k, s.eps_x_tilde, s.S_x_tilde);
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.eps_x_tilde = s.S_x_tilde = nan;
    }
    return s;
}

ConsistencyStats aggregate(std::span<const RunLog> logs) {
    if (logs.empty() || logs.front().empty()) throw DomainError("aggregate: no runs");
    const auto& first = logs.front().front();
    const int n_x = static_cast<int>(first.estimate.mean.size());
    const int n_z = static_cast<int>(first.innovation.innovation.size());
    std::vector<NormalizedErrors> runs;
    runs.reserve(logs.size());
    for (const auto& log : logs) {
        NormalizedErrors e;
        const bool truth = !log.empty() && log.front().truth_state.size() > 0;
        for (const auto& step : log) {
            e.nis.push_back(nis(step.innovation.innovation, step.innovation.innov_cov));
            if (truth) e.nees.push_back(nees(step.truth_state - step.estimate.mean, step.estimate.cov));
        }
        runs.push_back(std::move(e));
    }
    return aggregate(runs, n_x, n_z);
}

ChiSquareBounds chi2_bounds(int dof, int N, double alpha) {
    if (dof < 1) throw DomainError("chi2_bounds: dof must be >= 1");
    if (N < 1) throw DomainError("chi2_bounds: N must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chi2_bounds: alpha must lie in (0, 1)");
    const double total = static_cast<double>(N) * dof;
    ChiSquareBounds b;
    b.lower = chi2_quantile(total, 0.5 * alpha) / N;
    b.upper = chi2_quantile(total, 1.0 - 0.5 * alpha) / N;
    b.alpha = alpha;
    b.dof_per_sample = dof;
    b.N = N;
    return b;
}

double j_metric(double eps_tilde, int dof) { return abs_log_ratio(eps_tilde, dof, "eps_tilde"); }

double c_metric(double eps_tilde, double S_tilde, int dof) {
    return abs_log_ratio(eps_tilde, dof, "eps_tilde") + abs_log_ratio(S_tilde, 2.0 * dof, "S_tilde");
}

double v_metric(double S_tilde, int dof) { return abs_log_ratio(S_tilde, 2.0 * dof, "S_tilde"); }

double multi_dt_cost(std::span<const double> per_dt_costs, Reducer reducer) {
    if (per_dt_costs.empty()) throw DomainError("multi_dt_cost: empty cost list");
    if (reducer == Reducer::Max) return *std::max_element(per_dt_costs.begin(), per_dt_costs.end());
    double total = 0.0;
    for (double c : per_dt_costs) total += c;
    return total;
}

QuadFormMoments quad_form_moments(const Matrix& Lambda, const Matrix& Sigma, const Vector& mu) {
    require_square(Lambda, "Lambda");
    require_shape(Sigma, Lambda.rows(), Lambda.cols(), "Sigma");
    if (mu.size() != Lambda.rows()) throw DimensionError("mu does not match Lambda");
    const Matrix LS = Lambda * Sigma;
    const Vector Lmu = Lambda * mu;
    QuadFormMoments m;
    m.mean = LS.trace() + mu.dot(Lmu);
    m.var = 2.0 * (LS * LS).trace() + 4.0 * Lmu.dot(Sigma * Lmu);
    return m;
}

Verdict classify(double value, const ChiSquareBounds& bounds) {
    if (value < bounds.lower) return Verdict::Pessimistic;
    if (value > bounds.upper) return Verdict::Optimistic;
    return Verdict::Consistent;
}

ConsistencyEntry make_entry(double dt, ConsistencyStats stats, double alpha) {
    ConsistencyEntry e;
    e.dt = dt;
    e.nis_bounds = chi2_bounds(stats.n_z, stats.N, alpha);
    e.nees_bounds = chi2_bounds(stats.n_x, stats.N, alpha);

    auto safe = [](auto&& f) {
        try {
            return f();
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    e.j_nis = safe([&] { return j_metric(stats.eps_z_tilde, stats.n_z); });
    e.c_nis = safe([&] { return c_metric(stats.eps_z_tilde, stats.S_z_tilde, stats.n_z); });
    e.v_nis = safe([&] { return v_metric(stats.S_z_tilde, stats.n_z); });

    auto fraction_inside = [](const std::vector<double>& avg, const ChiSquareBounds& b) {
        if (avg.empty()) return 0.0;
        const auto inside = std::count_if(avg.begin(), avg.end(), [&](double a) { return b.contains(a); });
        return static_cast<double>(inside) / static_cast<double>(avg.size());
    };
    e.nis_in_bounds = fraction_inside(stats.avg_nis_k, e.nis_bounds);
    e.nis_verdict = classify(stats.eps_z_tilde, e.nis_bounds);
    e.pass = e.nis_verdict == Verdict::Consistent;

    if (stats.has_nees) {
        e.j_nees = safe([&] { return j_metric(stats.eps_x_tilde, stats.n_x); });
        e.c_nees = safe([&] { return c_metric(stats.eps_x_tilde, stats.S_x_tilde, stats.n_x); });
        e.v_nees = safe([&] { return v_metric(stats.S_x_tilde, stats.n_x); });
        e.nees_in_bounds = fraction_inside(stats.avg_nees_k, e.nees_bounds);
        e.nees_verdict = classify(stats.eps_x_tilde, e.nees_bounds);
        e.pass = e.pass && e.nees_verdict == Verdict::Consistent;
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        e.j_nees = e.c_nees = e.v_nees = e.nees_in_bounds = nan;
    }
    e.stats = std::move(stats);
    return e;
}

}  // namespace kftune

#include "kftune/montecarlo.hpp"

#include "kftune/consistency.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace kftune {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kProcessStream = 0x70726f63ULL;
constexpr std::uint64_t kMeasurementStream = 0x6d656173ULL;

std::atomic<int> g_threads{1};

Vector draw_gaussian(const Matrix& factor, CounterRng& rng, std::normal_distribution<double>& nd) {
    Vector e(factor.cols());
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = nd(rng);
    return factor * e;
}

StateEstimate initial_estimate(const SimConfig& cfg, Eigen::Index n) {
    StateEstimate est;
    est.mean = cfg.x0.size() == 0 ? Vector::Zero(n) : cfg.x0;
    if (est.mean.size() != n) throw DimensionError("x0 does not match the state dimension");
    est.cov = cfg.p0_scale * Matrix::Identity(n, n);
    return est;
}

void check_inputs(const TruthData& data, const DiscreteModel& model, const SimConfig& cfg) {
    cfg.validate();
    if (std::abs(model.dt - cfg.dt) > 1e-12 * std::max(1.0, cfg.dt)) {
        throw DomainError("filter model dt does not match the simulation dt");
    }
    if (static_cast<int>(data.measurements.size()) != cfg.n_steps) {
        throw DimensionError("measurement count does not match n_steps");
    }
    if (!data.states.empty() && data.states.size() != data.measurements.size()) {
        throw DimensionError("truth state count does not match measurement count");
    }
}

// One predict/update pass; sink(k, pred, post, innovation) sees every step.
template <class Sink>
void filter_loop(const std::vector<Vector>& measurements, const DiscreteModel& model,
                 const SimConfig& cfg, Sink&& sink) {
    StateEstimate est = initial_estimate(cfg, model.state_dim());
    for (int k = 1; k <= static_cast<int>(measurements.size()); ++k) {
        const Vector u = control_input(cfg, k, model.input_dim());
        StateEstimate pred = predict(est, model, u);
        auto [post, innov] = update(pred, model, measurements[k - 1]);
        sink(k, post, innov);
        est = std::move(post);
    }
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

CounterRng::result_type CounterRng::operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
    h = mix64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
    return h;
}

std::uint64_t dt_key(double dt) noexcept { return mix64(std::bit_cast<std::uint64_t>(dt)); }

double ControlSignal::at(double t) const {
    return amplitude == 0.0 ? 0.0 : amplitude * std::cos(frequency * t);
}

void SimConfig::validate() const {
    if (n_runs < 1) throw DomainError("n_runs must be >= 1");
    if (n_steps < 1) throw DomainError("n_steps must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(p0_scale > 0.0)) throw DomainError("p0_scale must be positive");
}

Vector control_input(const SimConfig& cfg, int k, Eigen::Index n_u) {
    return Vector::Constant(n_u, cfg.control.at((k - 1) * cfg.dt));
}

Matrix noise_factor(const Matrix& cov) {
    const Matrix clipped = clip_psd(cov);
    Eigen::LLT<Matrix> llt(clipped);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(clipped);
    if (eig.info() != Eigen::Success) throw NumericalError("cannot factor noise covariance", cov);
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

TruthData simulate_truth(const DiscreteModel& truth_model, const SimConfig& cfg, int run_index) {
    cfg.validate();
    if (std::abs(truth_model.dt - cfg.dt) > 1e-12 * std::max(1.0, cfg.dt)) {
        throw DomainError("truth model dt does not match the simulation dt");
    }
    const auto n = truth_model.state_dim();
    const Matrix Lq = noise_factor(truth_model.Q);
    const Matrix Lr = noise_factor(truth_model.R);

    const auto run = static_cast<std::uint64_t>(run_index);
    CounterRng proc_rng(derive_key(cfg.seed, run, kProcessStream));
    CounterRng meas_rng(derive_key(cfg.seed, run, kMeasurementStream));
    std::normal_distribution<double> proc_nd;
    std::normal_distribution<double> meas_nd;

    TruthData out;
    out.states.reserve(cfg.n_steps);
    out.measurements.reserve(cfg.n_steps);
    Vector x = cfg.x0.size() == 0 ? Vector::Zero(n) : cfg.x0;
    if (x.size() != n) throw DimensionError("x0 does not match the state dimension");
    for (int k = 1; k <= cfg.n_steps; ++k) {
        const Vector u = control_input(cfg, k, truth_model.input_dim());
        Vector next = truth_model.F * x;
        if (truth_model.input_dim() > 0) next.noalias() += truth_model.B * u;
        next += draw_gaussian(Lq, proc_rng, proc_nd);
        Vector z = truth_model.H * next + draw_gaussian(Lr, meas_rng, meas_nd);
        out.states.push_back(next);
        out.measurements.push_back(std::move(z));
        x = std::move(next);
    }
    return out;
}

RunLog run_filter(const TruthData& data, const DiscreteModel& filter_model, const SimConfig& cfg) {
    check_inputs(data, filter_model, cfg);
    RunLog log;
    log.reserve(data.measurements.size());
    filter_loop(data.measurements, filter_model, cfg,
                [&](int k, const StateEstimate& post, const InnovationRecord& innov) {
                    StepRecord rec;
                    if (!data.states.empty()) rec.truth_state = data.states[k - 1];
                    rec.estimate = post;
                    rec.innovation = innov;
                    rec.measurement = data.measurements[k - 1];
                    log.push_back(std::move(rec));
                });
    return log;
}

NormalizedErrors run_filter_errors(const TruthData& data, const DiscreteModel& filter_model,
                                   const SimConfig& cfg, bool with_nees) {
    check_inputs(data, filter_model, cfg);
    with_nees = with_nees && !data.states.empty();
    NormalizedErrors out;
    out.nis.reserve(data.measurements.size());
    if (with_nees) out.nees.reserve(data.measurements.size());
    filter_loop(data.measurements, filter_model, cfg,
                [&](int k, const StateEstimate& post, const InnovationRecord& innov) {
                    out.nis.push_back(nis(innov.innovation, innov.innov_cov));
                    if (with_nees) {
                        out.nees.push_back(nees(data.states[k - 1] - post.mean, post.cov));
                    }
                });
    return out;
}

std::vector<double> run_filter_nis(const std::vector<Vector>& measurements,
                                   const DiscreteModel& filter_model, const SimConfig& cfg) {
    TruthData data;
    data.measurements = measurements;
    return run_filter_errors(data, filter_model, cfg, false).nis;
}

std::vector<NormalizedErrors> monte_carlo_errors(const DiscreteModel& truth_model,
                                                 const DiscreteModel& filter_model,
                                                 const SimConfig& cfg, bool with_nees) {
    cfg.validate();
    std::vector<NormalizedErrors> out(cfg.n_runs);
    parallel_for(cfg.n_runs, [&](int i) {
        const TruthData data = simulate_truth(truth_model, cfg, i);
        out[i] = run_filter_errors(data, filter_model, cfg, with_nees);
    });
    return out;
}

void set_thread_count(int n) { g_threads.store(n < 1 ? 1 : n); }

int thread_count() { return g_threads.load(); }

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(body);
    body();
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace kftune

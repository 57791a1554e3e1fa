#include "kftune/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace kftune {

namespace {

struct Rect {
    Vector center;            // unit-cube coordinates
    std::vector<int> level;   // side length along i is 3^-level[i]
    double value;             // minimized objective, i.e. -f
    double size;              // center-to-vertex distance
};

double half_diagonal(std::vector<int> level) {
    std::sort(level.begin(), level.end());
    double s = 0.0;
    for (int l : level) s += std::pow(9.0, -l);
    return 0.5 * std::sqrt(s);
}

// Indices of potentially optimal rectangles: lower-right convex hull of (size, value)
// starting from the best rectangle, filtered by the epsilon improvement condition.
std::vector<std::size_t> potentially_optimal(const std::vector<Rect>& rects, double f_min,
                                             double epsilon) {
    // Best rectangle per distinct size; ties on value keep the first one created.
    std::map<double, std::size_t> best_by_size;
    for (std::size_t i = 0; i < rects.size(); ++i) {
        auto [it, inserted] = best_by_size.try_emplace(rects[i].size, i);
        if (!inserted && rects[i].value < rects[it->second].value) it->second = i;
    }
    std::vector<std::size_t> cand;
    for (const auto& [size, idx] : best_by_size) cand.push_back(idx);

    // Start at the largest rectangle attaining the minimum value.
    std::size_t start = 0;
    double start_value = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cand.size(); ++c) {
        if (rects[cand[c]].value <= start_value) {
            start_value = rects[cand[c]].value;
            start = c;
        }
    }

    std::vector<std::size_t> hull;
    for (std::size_t c = start; c < cand.size(); ++c) {
        const Rect& r = rects[cand[c]];
        while (hull.size() >= 2) {
            const Rect& a = rects[hull[hull.size() - 2]];
            const Rect& b = rects[hull.back()];
            // drop b when it lies on or above the segment a -> r
            const double cross = (b.size - a.size) * (r.value - a.value) - (b.value - a.value) * (r.size - a.size);
            if (cross <= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        if (hull.size() == 1 && r.value <= rects[hull.back()].value) {
            hull.back() = cand[c];
            continue;
        }
        hull.push_back(cand[c]);
    }

    std::vector<std::size_t> out;
    const double threshold = f_min - epsilon * std::abs(f_min);
    for (std::size_t h = 0; h < hull.size(); ++h) {
        const Rect& r = rects[hull[h]];
        if (h + 1 == hull.size()) {
            out.push_back(hull[h]);
            break;
        }
        const Rect& next = rects[hull[h + 1]];
        const double slope = (next.value - r.value) / (next.size - r.size);
        if (r.value - slope * r.size <= threshold) out.push_back(hull[h]);
    }
    return out;
}

}  // namespace

DirectResult direct_maximize(const std::function<double(const Vector&)>& f,
                             const SearchSpace& space, const DirectConfig& cfg) {
    if (space.dim() == 0) throw DimensionError("direct_maximize: empty search space");
    if (cfg.max_evals < 1 || cfg.max_iters < 1) throw DomainError("direct_maximize: budgets must be positive");
    const auto d = space.dim();

    DirectResult result;
    auto objective = [&](const Vector& unit) {
        ++result.evals;
        const double v = f(space.from_unit(unit));
        if (std::isnan(v)) throw DomainError("direct_maximize: objective returned NaN");
        return -v;
    };

    std::vector<Rect> rects;
    {
        Rect root{Vector::Constant(d, 0.5), std::vector<int>(d, 0), 0.0, 0.0};
        root.value = objective(root.center);
        root.size = half_diagonal(root.level);
        rects.push_back(std::move(root));
    }
    std::size_t best = 0;

    for (int iter = 0; iter < cfg.max_iters && result.evals < cfg.max_evals; ++iter) {
        ++result.iterations;
        const auto selected = potentially_optimal(rects, rects[best].value, cfg.epsilon);
        bool budget_hit = false;
        for (std::size_t idx : selected) {
            const std::vector<int> levels = rects[idx].level;
            const int min_level = *std::min_element(levels.begin(), levels.end());
            std::vector<Eigen::Index> dims;
            for (Eigen::Index i = 0; i < d; ++i) {
                if (levels[i] == min_level) dims.push_back(i);
            }
            if (result.evals + 2 * static_cast<int>(dims.size()) > cfg.max_evals) {
                budget_hit = true;
                break;
            }
            const double delta = std::pow(3.0, -(min_level + 1));
            const Vector center = rects[idx].center;

            struct Probe {
                Eigen::Index dim;
                Vector lo_c, hi_c;
                double lo_v, hi_v;
            };
            std::vector<Probe> probes;
            for (Eigen::Index i : dims) {
                Probe p{i, center, center, 0.0, 0.0};
                p.lo_c[i] -= delta;
                p.hi_c[i] += delta;
                p.lo_v = objective(p.lo_c);
                p.hi_v = objective(p.hi_c);
                probes.push_back(std::move(p));
            }
            std::stable_sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) {
                return std::min(a.lo_v, a.hi_v) < std::min(b.lo_v, b.hi_v);
            });

            std::vector<int> running = levels;
            for (auto& p : probes) {
                ++running[p.dim];
                for (auto* side : {&p.lo_c, &p.hi_c}) {
                    Rect child{*side, running, side == &p.lo_c ? p.lo_v : p.hi_v, half_diagonal(running)};
                    rects.push_back(std::move(child));
                    if (rects.back().value < rects[best].value) best = rects.size() - 1;
                }
            }
            rects[idx].level = running;
            rects[idx].size = half_diagonal(running);
        }
        if (budget_hit) break;
    }

    result.q_best = space.from_unit(rects[best].center);
    result.f_best = -rects[best].value;
    return result;
}

}  // namespace kftune

#include "kftune/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace kftune {

namespace {

struct Vertex {
    Vector x;
    double f;
};

}  // namespace

Vector expansion_point(const Vector& centroid, const Vector& reflected, double coef) {
    return centroid + coef * (reflected - centroid);
}

SimplexResult nelder_mead(const Objective& f, const Vector& x0, const SimplexOptions& opts) {
    const Eigen::Index n = x0.size();
    if (n == 0) throw DimensionError("nelder_mead: empty start vector");
    const bool boxed = opts.lower.size() > 0;
    if (boxed && (opts.lower.size() != n || opts.upper.size() != n)) {
        throw DimensionError("nelder_mead: bounds do not match the start vector");
    }
    if (opts.max_evals < 1) throw DomainError("nelder_mead: max_evals must be positive");

    auto clamp = [&](Vector x) {
        if (boxed) x = x.cwiseMax(opts.lower).cwiseMin(opts.upper);
        return x;
    };

    SimplexResult result;
    auto eval = [&](const Vector& x) {
        ++result.evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    const Vector start = clamp(x0);
    simplex.push_back({start, eval(start)});
    for (Eigen::Index i = 0; i < n && result.evals < opts.max_evals; ++i) {
        Vector x = start;
        x[i] += opts.initial_step;
        if (boxed && x[i] > opts.upper[i]) x[i] = start[i] - opts.initial_step;
        x = clamp(x);
        simplex.push_back({x, eval(x)});
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            d = std::max(d, (simplex[i].x - simplex[0].x).lpNorm<Eigen::Infinity>());
        }
        return d;
    };

    while (simplex.size() == static_cast<std::size_t>(n + 1)) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        if (diameter() < opts.tol) {
            result.converged = true;
            break;
        }
        if (result.evals >= opts.max_evals) break;

        Vector centroid = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i].x;
        centroid /= static_cast<double>(n);
        Vertex& worst = simplex.back();
        const double f_best = simplex.front().f;
        const double f_second_worst = simplex[n - 1].f;

        const Vector xr = clamp(centroid + opts.reflection * (centroid - worst.x));
        const double fr = eval(xr);

        if (fr < f_best) {
            const Vector xe = clamp(expansion_point(centroid, xr, opts.expansion));
            if (xe == xr || result.evals >= opts.max_evals) {
                worst = {xr, fr};
            } else {
                const double fe = eval(xe);
                worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
            }
            continue;
        }
        if (fr < f_second_worst) {
            worst = {xr, fr};
            continue;
        }
        if (result.evals >= opts.max_evals) {
            if (fr < worst.f) worst = {xr, fr};
            break;
        }
        if (fr < worst.f) {
            const Vector xc = clamp(centroid + opts.contraction * (xr - centroid));
            const double fc = eval(xc);
            if (fc <= fr) {
                worst = {xc, fc};
                continue;
            }
        } else {
            const Vector xcc = clamp(centroid + opts.contraction * (worst.x - centroid));
            const double fcc = eval(xcc);
            if (fcc < worst.f) {
                worst = {xcc, fcc};
                continue;
            }
        }
        for (std::size_t i = 1; i < simplex.size() && result.evals < opts.max_evals; ++i) {
            simplex[i].x = clamp(simplex[0].x + opts.shrink * (simplex[i].x - simplex[0].x));
            simplex[i].f = eval(simplex[i].x);
        }
    }

    const auto best = std::min_element(simplex.begin(), simplex.end(), by_value);
    result.x = best->x;
    result.f = best->f;
    return result;
}

}  // namespace kftune

#pragma once

#include "kftune/linalg.hpp"

#include <functional>

namespace kftune {

/// Downhill simplex settings. Coefficient names follow the usual reflection / expansion /
/// contraction / shrink ("full contraction") terminology.
struct SimplexOptions {
    double reflection = 1.0;
    double expansion = 1.0;
    double contraction = 0.5;
    double shrink = 0.5;
    int max_evals = 200;
    double tol = 1e-4;          // stop when the simplex diameter falls below this
    double initial_step = 0.1;  // edge length of the starting simplex along each axis
    Vector lower;               // optional box; candidates are clamped into it
    Vector upper;
};

struct SimplexResult {
    Vector x;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

using Objective = std::function<double(const Vector&)>;

/// Expansion candidate centroid + coef * (reflected - centroid). With coef == 1 this is the
/// reflected point itself, and the minimizer skips the redundant evaluation.
Vector expansion_point(const Vector& centroid, const Vector& reflected, double coef);

SimplexResult nelder_mead(const Objective& f, const Vector& x0, const SimplexOptions& opts);

}  // namespace kftune

#pragma once

#include "kftune/linalg.hpp"
#include "kftune/special.hpp"

#include <functional>

namespace kftune {

/// Axis-aligned search box.
struct SearchSpace {
    Vector lower;
    Vector upper;

    SearchSpace() = default;
    SearchSpace(Vector lo, Vector hi);

    Eigen::Index dim() const noexcept { return lower.size(); }
    bool contains(const Vector& q) const;
    /// Affine map between the box and the unit cube.
    Vector to_unit(const Vector& q) const;
    Vector from_unit(const Vector& u) const;
};

struct DirectConfig {
    int max_evals = 2000;
    int max_iters = 1000;
    double epsilon = 1e-4;
};

/// Expected improvement E[max(0, best - Y)] for Y = u + sqrt_scale * T.
///
/// Student-t (finite dof > 1):
///   (best - u) Psi(z) + dof / (dof - 1) * (1 + z^2 / dof) * scale * psi(z)
/// Gaussian (infinite dof):
///   (best - u) Phi(z) + scale * phi(z)
/// with z = (best - u) / scale. `scale` is the standard scale of Y, not its square.
double expected_improvement(double best, double u, double scale, double dof);

struct DirectResult {
    Vector q_best;
    double f_best = 0.0;
    int evals = 0;
    int iterations = 0;
};

/// Maximizes f over the box with DIviding RECTangles on the normalized unit cube.
/// Deterministic for a deterministic f; throws DomainError if f returns NaN.
DirectResult direct_maximize(const std::function<double(const Vector&)>& f,
                             const SearchSpace& space, const DirectConfig& cfg = {});

}  // namespace kftune

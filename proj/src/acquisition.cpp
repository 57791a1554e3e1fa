#include "kftune/acquisition.hpp"

#include <algorithm>
#include <cmath>

namespace kftune {

SearchSpace::SearchSpace(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw DimensionError("search space bounds must be non-empty and of equal length");
    }
    if (!lower.allFinite() || !upper.allFinite() || (lower.array() >= upper.array()).any()) {
        throw DomainError("search space needs finite lower < upper in every dimension");
    }
}

bool SearchSpace::contains(const Vector& q) const {
    return q.size() == dim() && (q.array() >= lower.array()).all() && (q.array() <= upper.array()).all();
}

Vector SearchSpace::to_unit(const Vector& q) const {
    return ((q - lower).array() / (upper - lower).array()).matrix();
}

Vector SearchSpace::from_unit(const Vector& u) const {
    Vector q = lower + (u.array() * (upper - lower).array()).matrix();
    return q.cwiseMax(lower).cwiseMin(upper);
}

double expected_improvement(double best, double u, double scale, double dof) {
    if (!(scale > 0.0)) throw DomainError("expected_improvement: scale must be positive");
    const double gap = best - u;
    const double z = gap / scale;
    double ei = 0.0;
    if (std::isinf(dof)) {
        ei = gap * normal_cdf(z) + scale * normal_pdf(z);
    } else {
        if (!(dof > 1.0)) throw DomainError("expected_improvement: dof must exceed 1");
        ei = gap * student_t_cdf(z, dof) +
             dof / (dof - 1.0) * (1.0 + z * z / dof) * scale * student_t_pdf(z, dof);
    }
    return std::max(0.0, ei);
}

}  // namespace kftune

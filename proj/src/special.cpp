#include "kftune/special.hpp"

#include "kftune/linalg.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace kftune {

namespace {

using NoThrowPolicy = boost::math::policies::policy<
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>>;

}  // namespace

double chi2_quantile(double dof, double p) {
    if (!(dof > 0.0)) throw DomainError("chi2_quantile: dof must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0, 1)");
    try {
        return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
    } catch (const boost::math::evaluation_error& e) {
        throw NumericalError(std::string("chi-square quantile inversion failed: ") + e.what());
    }
}

double student_t_cdf(double z, double dof) {
    if (!(dof > 0.0)) throw DomainError("student_t_cdf: dof must be positive");
    if (std::isinf(dof)) return normal_cdf(z);
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double, NoThrowPolicy>(dof), z);
}

double student_t_pdf(double z, double dof) {
    if (!(dof > 0.0)) throw DomainError("student_t_pdf: dof must be positive");
    if (std::isinf(dof)) return normal_pdf(z);
    if (std::isinf(z)) return 0.0;
    return boost::math::pdf(boost::math::students_t_distribution<double, NoThrowPolicy>(dof), z);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

}  // namespace kftune

#pragma once

namespace kftune {

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
double chi2_quantile(double dof, double p);

/// Standard Student-t CDF / density. An infinite dof gives the standard normal.
double student_t_cdf(double z, double dof);
double student_t_pdf(double z, double dof);

double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace kftune

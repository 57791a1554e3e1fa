#pragma once

#include "kftune/linalg.hpp"
#include "kftune/statespace.hpp"

#include <utility>

namespace kftune {

struct StateEstimate {
    Vector mean;
    Matrix cov;
};

struct InnovationRecord {
    Vector innovation;  // z_k - H x_{k|k-1}
    Matrix innov_cov;   // S_{k|k-1}
    Matrix gain;        // K_k
};

/// Time update: x = F x + B u, P = F P F^T + Q (symmetrized).
StateEstimate predict(const StateEstimate& prior, const DiscreteModel& model, const Vector& u);

/// Measurement update with the covariance form P - K S K^T. The gain is obtained from a
/// Cholesky solve on S; a failed factorization of S or of the posterior covariance throws
/// NumericalError carrying that matrix.
std::pair<StateEstimate, InnovationRecord> update(const StateEstimate& pred,
                                                  const DiscreteModel& model, const Vector& z);

/// Joseph-form covariance (I-KH) P (I-KH)^T + K R K^T, exposed for cross-checks.
Matrix joseph_covariance(const Matrix& P, const Matrix& K, const Matrix& H, const Matrix& R);

}  // namespace kftune

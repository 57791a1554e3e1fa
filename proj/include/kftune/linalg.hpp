#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace kftune {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid shapes or arities.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (dt <= 0, log of 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A factorization or numerical check failed. Carries the offending matrix when there is one.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, Matrix offending = Matrix())
        : std::runtime_error(what), matrix_(std::move(offending)) {}

    const Matrix& matrix() const noexcept { return matrix_; }

private:
    Matrix matrix_;
};

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_square(const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(name) + " must be square, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
}

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError(std::string(name) + " expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
    }
}

/// Symmetrizes `m` and clips eigenvalues in [-tol, 0) to zero. Throws when the most
/// negative eigenvalue is below -tol.
Matrix clip_psd(const Matrix& m, double tol = 1e-10);

/// Minimum eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Matrix& m);

}  // namespace kftune

#pragma once

#include "kftune/linalg.hpp"

namespace kftune {

/// Continuous-time LTI plant
///
///   dx/dt = A x + G u + Gamma v,   z = H x + w
///
/// with white process noise of intensity V and measurement noise of intensity W.
class ContinuousModel {
public:
    /// Validates dimensions, V symmetric PSD and W symmetric PD.
    ContinuousModel(Matrix A, Matrix G, Matrix Gamma, Matrix H, Matrix V, Matrix W);

    const Matrix& A() const noexcept { return A_; }
    const Matrix& G() const noexcept { return G_; }
    const Matrix& Gamma() const noexcept { return Gamma_; }
    const Matrix& H() const noexcept { return H_; }
    const Matrix& V() const noexcept { return V_; }
    const Matrix& W() const noexcept { return W_; }

    Eigen::Index state_dim() const noexcept { return A_.rows(); }
    Eigen::Index input_dim() const noexcept { return G_.cols(); }
    Eigen::Index noise_dim() const noexcept { return Gamma_.cols(); }
    Eigen::Index meas_dim() const noexcept { return H_.rows(); }

private:
    Matrix A_, G_, Gamma_, H_, V_, W_;
};

/// Zero-order-hold discretization of a ContinuousModel at interval dt.
struct DiscreteModel {
    Matrix F;
    Matrix B;
    Matrix H;
    Matrix Q;
    Matrix R;
    double dt = 0.0;

    Eigen::Index state_dim() const noexcept { return F.rows(); }
    Eigen::Index input_dim() const noexcept { return B.cols(); }
    Eigen::Index meas_dim() const noexcept { return H.rows(); }
};

/// e^M by scaling and squaring with a degree-13 Pade approximant.
/// Throws DimensionError for non-square input and DomainError for non-finite entries.
Matrix matrix_exponential(const Matrix& M);

/// Van Loan discretization:
///   F = e^{A dt}
///   B = (int_0^dt e^{A s} ds) G
///   Q = int_0^dt e^{A s} Gamma V Gamma^T e^{A^T s} ds
///   R = W / dt
/// Q is symmetrized and its eigenvalues in [-1e-10, 0) are clipped; raw asymmetry
/// above 1e-8 or a more negative eigenvalue raises NumericalError.
DiscreteModel discretize(const ContinuousModel& model, double dt);

}  // namespace kftune

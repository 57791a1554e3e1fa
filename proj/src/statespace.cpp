#include "kftune/statespace.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace kftune {

namespace {

void require_symmetric(const Matrix& m, const char* name) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError(std::string(name) + " must be symmetric");
    }
}

}  // namespace

Matrix clip_psd(const Matrix& m, double tol) {
    require_square(m, "clip_psd input");
    const Matrix sym = symmetrized(m);
    if (sym.size() == 0) return sym;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed", sym);
    }
    const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    const Vector& lambda = eig.eigenvalues();
    if (lambda.minCoeff() >= 0.0) return sym;
    if (lambda.minCoeff() < -tol * scale) {
        throw NumericalError("matrix is not positive semidefinite (min eigenvalue " +
                                 std::to_string(lambda.minCoeff()) + ")",
                             sym);
    }
    const Matrix& U = eig.eigenvectors();
    Matrix clipped = U * lambda.cwiseMax(0.0).asDiagonal() * U.transpose();
    return symmetrized(clipped);
}

double min_eigenvalue(const Matrix& m) {
    require_square(m, "min_eigenvalue input");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

ContinuousModel::ContinuousModel(Matrix A, Matrix G, Matrix Gamma, Matrix H, Matrix V, Matrix W)
    : A_(std::move(A)),
      G_(std::move(G)),
      Gamma_(std::move(Gamma)),
      H_(std::move(H)),
      V_(std::move(V)),
      W_(std::move(W)) {
    require_square(A_, "A");
    const auto nx = A_.rows();
    if (G_.rows() != nx) throw DimensionError("G must have as many rows as A");
    if (Gamma_.rows() != nx) throw DimensionError("Gamma must have as many rows as A");
    if (H_.cols() != nx) throw DimensionError("H must have as many columns as A has rows");
    require_shape(V_, Gamma_.cols(), Gamma_.cols(), "V");
    require_shape(W_, H_.rows(), H_.rows(), "W");
    for (const Matrix* m : {&A_, &G_, &Gamma_, &H_, &V_, &W_}) {
        if (!all_finite(*m)) throw DomainError("continuous model entries must be finite");
    }
    require_symmetric(V_, "V");
    require_symmetric(W_, "W");
    if (V_.size() > 0 && min_eigenvalue(V_) < -1e-12 * std::max(1.0, V_.cwiseAbs().maxCoeff())) {
        throw DomainError("V must be positive semidefinite");
    }
    if (W_.size() > 0 && W_.llt().info() != Eigen::Success) {
        throw DomainError("W must be positive definite");
    }
}

Matrix matrix_exponential(const Matrix& M) {
    require_square(M, "matrix_exponential input");
    if (!all_finite(M)) throw DomainError("matrix_exponential input has non-finite entries");
    // Eigen's implementation: Higham's scaling and squaring, Pade 13 for double.
    Matrix result = M.exp();
    if (!all_finite(result)) throw NumericalError("matrix exponential overflowed", M);
    return result;
}

DiscreteModel discretize(const ContinuousModel& model, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("discretize: dt must be positive and finite");
    }
    const auto n = model.state_dim();
    const Matrix& A = model.A();

    // Van Loan block for Q: exp([[-A, GVG^T], [0, A^T]] dt) = [[., F^{-1} Q], [0, F^T]].
    const Matrix noise = model.Gamma() * model.V() * model.Gamma().transpose();
    Matrix block = Matrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = -A;
    block.topRightCorner(n, n) = noise;
    block.bottomRightCorner(n, n) = A.transpose();
    const Matrix E = matrix_exponential(block * dt);
    const Matrix F = E.bottomRightCorner(n, n).transpose();
    Matrix Q = F * E.topRightCorner(n, n);

    const double scale = std::max(1e-300, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, scale)) {
        throw NumericalError("discretized Q is asymmetric beyond tolerance", Q);
    }
    Q = clip_psd(Q, 1e-10);

    // Input integral: exp([[A, I], [0, 0]] dt) = [[F, int_0^dt e^{As} ds], [0, I]].
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, n) = Matrix::Identity(n, n);
    const Matrix Eb = matrix_exponential(aug * dt);

    DiscreteModel out;
    out.F = F;
    out.B = Eb.topRightCorner(n, n) * model.G();
    out.H = model.H();
    out.Q = std::move(Q);
    out.R = model.W() / dt;
    out.dt = dt;
    return out;
}

}  // namespace kftune

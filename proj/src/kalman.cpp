#include "kftune/kalman.hpp"

namespace kftune {

StateEstimate predict(const StateEstimate& prior, const DiscreteModel& model, const Vector& u) {
    const auto n = model.state_dim();
    if (prior.mean.size() != n) throw DimensionError("predict: state mean has wrong size");
    require_shape(prior.cov, n, n, "predict: covariance");
    if (u.size() != model.input_dim()) throw DimensionError("predict: control has wrong size");

    StateEstimate out;
    out.mean.noalias() = model.F * prior.mean;
    if (model.input_dim() > 0) out.mean.noalias() += model.B * u;
    Matrix FP = model.F * prior.cov;
    out.cov = model.Q;
    out.cov.noalias() += FP * model.F.transpose();
    out.cov = symmetrized(out.cov);
    return out;
}

std::pair<StateEstimate, InnovationRecord> update(const StateEstimate& pred,
                                                  const DiscreteModel& model, const Vector& z) {
    const auto n = model.state_dim();
    const auto m = model.meas_dim();
    if (pred.mean.size() != n) throw DimensionError("update: state mean has wrong size");
    require_shape(pred.cov, n, n, "update: covariance");
    if (z.size() != m) throw DimensionError("update: measurement has wrong size");

    InnovationRecord rec;
    const Matrix PHt = pred.cov * model.H.transpose();
    rec.innov_cov = model.R;
    rec.innov_cov.noalias() += model.H * PHt;
    rec.innov_cov = symmetrized(rec.innov_cov);

    Eigen::LLT<Matrix> llt(rec.innov_cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("innovation covariance is not positive definite", rec.innov_cov);
    }
    // K = P H^T S^{-1}  <=>  S K^T = H P
    rec.gain = llt.solve(PHt.transpose()).transpose();
    rec.innovation = z;
    rec.innovation.noalias() -= model.H * pred.mean;

    StateEstimate post;
    post.mean = pred.mean;
    post.mean.noalias() += rec.gain * rec.innovation;
    post.cov = pred.cov;
    const Matrix KS = rec.gain * rec.innov_cov;
    post.cov.noalias() -= KS * rec.gain.transpose();
    post.cov = symmetrized(post.cov);
    if (post.cov.llt().info() != Eigen::Success) {
        throw NumericalError("posterior covariance is not positive definite", post.cov);
    }
    return {std::move(post), std::move(rec)};
}

Matrix joseph_covariance(const Matrix& P, const Matrix& K, const Matrix& H, const Matrix& R) {
    const Matrix IKH = Matrix::Identity(P.rows(), P.cols()) - K * H;
    return IKH * P * IKH.transpose() + K * R * K.transpose();
}

}  // namespace kftune

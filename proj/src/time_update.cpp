#include "ettvb/time_update.hpp"

namespace ettvb {

TargetBelief time_update(const TargetBelief& posterior, const ModelConfig& cfg) {
  posterior.validate();
  cfg.validate_for(posterior.kinematics.dim());

  const Eigen::Index n = posterior.kinematics.dim();

  Eigen::VectorXd mean(n + 1);
  mean << posterior.kinematics.mean, posterior.orientation.mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n + 1, n + 1);
  cov.topLeftCorner(n, n) = posterior.kinematics.covariance;
  cov(n, n) = posterior.orientation.variance;

  const Eigen::VectorXd pred_mean = cfg.F * mean;
  const Eigen::MatrixXd pred_cov = symmetrized(cfg.F * cov * cfg.F.transpose() + cfg.Q);

  TargetBelief out;
  out.kinematics.mean = pred_mean.head(n);
  out.kinematics.covariance = pred_cov.topLeftCorner(n, n);
  out.orientation.mean = pred_mean(n);
  out.orientation.variance = pred_cov(n, n);

  out.extent = posterior.extent;
  if (cfg.gamma < 1.0) {
    out.extent.shape = (cfg.gamma * posterior.extent.shape.array()).max(kMinExtentShape);
    out.extent.scale = cfg.gamma * posterior.extent.scale;
  }
  return out;
}

}  // namespace ettvb

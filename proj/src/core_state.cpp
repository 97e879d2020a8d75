#include "ettvb/core_state.hpp"

#include <cmath>
#include <sstream>

#include "ettvb/rotation.hpp"

namespace ettvb {

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kDeterminantFloor = 1e-300;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw ConfigError(std::string(what) + " is not symmetric");
  }
}

}  // namespace

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

GaussianKinematics GaussianKinematics::make(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  GaussianKinematics g;
  g.mean = std::move(mean);
  if (covariance.rows() == covariance.cols()) {
    covariance = symmetrized(covariance);
  }
  g.covariance = std::move(covariance);
  g.validate();
  return g;
}

void GaussianKinematics::validate() const {
  if (mean.size() < 2) {
    throw ConfigError("kinematic state must have at least the two position components");
  }
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw ConfigError("kinematic covariance dimension does not match mean");
  }
  if (!mean.allFinite() || !all_finite(covariance)) {
    throw ConfigError("kinematic belief contains non-finite values");
  }
  check_symmetric(covariance, "kinematic covariance");
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(covariance));
  if (llt.info() != Eigen::Success) {
    throw ConfigError("kinematic covariance is not positive definite");
  }
}

void OrientationBelief::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(variance)) {
    throw ConfigError("orientation belief contains non-finite values");
  }
  if (variance < 0.0) {
    throw ConfigError("orientation variance must be nonnegative");
  }
}

void ExtentBelief::validate() const {
  if (!shape.allFinite() || !scale.allFinite()) {
    throw ConfigError("extent belief contains non-finite values");
  }
  if ((shape.array() <= 1.0).any()) {
    throw ConfigError("extent shape parameters must exceed 1");
  }
  if ((scale.array() <= 0.0).any()) {
    throw ConfigError("extent scale parameters must be positive");
  }
}

void TargetBelief::validate() const {
  kinematics.validate();
  orientation.validate();
  extent.validate();
}

void ModelConfig::validate() const {
  if (H.rows() != 2 || H.cols() < 2) {
    throw ConfigError("H must be 2 x n_x with n_x >= 2");
  }
  const Eigen::Index n_aug = H.cols() + 1;
  if (F.rows() != n_aug || F.cols() != n_aug) {
    std::ostringstream os;
    os << "F must be " << n_aug << "x" << n_aug << " (augmented with orientation), got "
       << F.rows() << "x" << F.cols();
    throw ConfigError(os.str());
  }
  if (Q.rows() != n_aug || Q.cols() != n_aug) {
    std::ostringstream os;
    os << "Q must be " << n_aug << "x" << n_aug << ", got " << Q.rows() << "x" << Q.cols();
    throw ConfigError(os.str());
  }
  if (!H.allFinite() || !R.allFinite() || !F.allFinite() || !Q.allFinite()) {
    throw ConfigError("model matrices contain non-finite values");
  }
  check_symmetric(R, "R");
  check_symmetric(Q, "Q");
  if (R.determinant() <= 0.0 || R(0, 0) <= 0.0) {
    throw ConfigError("R must be positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q_eig(symmetrized(Q));
  if (q_eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw ConfigError("Q must be positive semi-definite");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ConfigError("scaling parameter s must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("forgetting factor must lie in (0, 1]");
  }
  if (max_iterations < 1) {
    throw ConfigError("max_iterations must be positive");
  }
  if (!(early_stop_tolerance >= 0.0)) {
    throw ConfigError("early_stop_tolerance must be nonnegative");
  }
}

void ModelConfig::validate_for(Eigen::Index n_x) const {
  validate();
  if (H.cols() != n_x) {
    std::ostringstream os;
    os << "H has " << H.cols() << " columns but the kinematic state has " << n_x;
    throw ConfigError(os.str());
  }
}

void MeasurementBatch::validate() const {
  for (const auto& p : points) {
    if (!p.allFinite()) {
      throw ConfigError("measurement batch contains non-finite points");
    }
  }
}

Mat2 extent_mean(const ExtentBelief& extent) {
  if ((extent.shape.array() <= 1.0).any()) {
    throw std::domain_error("extent mean undefined: inverse-Gamma shape must exceed 1");
  }
  const Vec2 diag = extent.scale.array() / (extent.shape.array() - 1.0);
  return diag.asDiagonal();
}

Mat2 estimated_extent_matrix(const TargetBelief& belief) {
  const Mat2 t = rotation(belief.orientation.mean);
  const Mat2 out = t * extent_mean(belief.extent) * t.transpose();
  return 0.5 * (out + out.transpose());
}

Mat2 inverse_2x2(const Mat2& m, const std::string& what) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (!std::isfinite(det) || std::abs(det) < kDeterminantFloor) {
    throw NumericError(what + " is singular (determinant " + std::to_string(det) + ")");
  }
  Mat2 adj;
  adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return adj / det;
}

}  // namespace ettvb

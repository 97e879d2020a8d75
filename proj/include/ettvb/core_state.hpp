#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ettvb {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Invalid model, belief or scenario configuration. Surfaces as exit code 2 in the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown inside an update (singular matrix, degenerate prior, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian belief over the kinematic state (position first, then velocity).
struct GaussianKinematics {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  /// Symmetrizes the covariance and validates it (symmetric positive definite).
  static GaussianKinematics make(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  void validate() const;
  [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

/// Gaussian belief over the extent orientation angle. The mean is kept unwrapped.
struct OrientationBelief {
  double mean = 0.0;
  double variance = 0.0;

  void validate() const;
};

/// Independent inverse-Gamma beliefs over the diagonal of the extent matrix.
/// Each diagonal entry is a squared semi-axis scale.
struct ExtentBelief {
  Vec2 shape{2.0, 2.0};
  Vec2 scale{1.0, 1.0};

  void validate() const;
};

struct TargetBelief {
  GaussianKinematics kinematics;
  OrientationBelief orientation;
  ExtentBelief extent;

  void validate() const;
};

struct ModelConfig {
  Eigen::MatrixXd H;       // 2 x n_x
  Mat2 R = Mat2::Identity();
  double s = 1.0;
  Eigen::MatrixXd F;       // (n_x+1) square, acts on [x; theta]
  Eigen::MatrixXd Q;       // (n_x+1) square
  double gamma = 1.0;
  int max_iterations = 10;
  // Stop sweeping once the largest change in (x, theta, alpha, beta) drops below
  // this value. Zero disables early stopping.
  double early_stop_tolerance = 0.0;

  [[nodiscard]] Eigen::Index state_dim() const { return H.cols(); }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  /// Also checks that the configuration fits a kinematic state of size n_x.
  void validate_for(Eigen::Index n_x) const;
};

struct MeasurementBatch {
  std::vector<Vec2> points;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }
  void validate() const;
};

/// Mean of the inverse-Gamma extent belief, diag(beta / (alpha - 1)).
/// Throws std::domain_error when any alpha <= 1.
Mat2 extent_mean(const ExtentBelief& extent);

/// Point estimate of the oriented extent: T(theta) * E[X] * T(theta)^T.
Mat2 estimated_extent_matrix(const TargetBelief& belief);

/// Closed-form 2x2 inverse via the adjugate. Throws NumericError when
/// |det| falls below 1e-300.
Mat2 inverse_2x2(const Mat2& m, const std::string& what = "matrix");

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m);

}  // namespace ettvb

#pragma once

// Random instance generators and independent reference computations shared by
// the unit, property and acceptance tests. Nothing here calls the library's
// update code; the references are written from the probabilistic definitions.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ettvb/core_state.hpp"
#include "ettvb/presets.hpp"
#include "ettvb/rotation.hpp"

namespace ettvb::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index n, double floor = 0.1, double scale = 3.0) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = uniform(rng, -scale, scale);
  Eigen::MatrixXd out = a * a.transpose() / static_cast<double>(n);
  out.diagonal().array() += floor;
  return 0.5 * (out + out.transpose());
}

inline Mat2 random_spd2(Rng& rng, double floor = 0.1, double scale = 3.0) {
  return random_spd(rng, 2, floor, scale);
}

inline Mat2 random_matrix2(Rng& rng, double scale = 3.0) {
  Mat2 m;
  for (int i = 0; i < 4; ++i) m(i) = uniform(rng, -scale, scale);
  return m;
}

/// Plain textbook rotation, written out independently of the library.
inline Mat2 rot(double t) {
  Mat2 m;
  m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return m;
}

/// Sample mean and standard error of T M T^T over theta ~ N(mean, var).
struct MatrixEstimate {
  Mat2 mean = Mat2::Zero();
  Mat2 stderr_ = Mat2::Zero();
};

inline MatrixEstimate mc_rotated(const Mat2& m, double mean, double var, std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(mean, std::sqrt(var));
  Mat2 sum = Mat2::Zero();
  Mat2 sq = Mat2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2 t = rot(normal(rng));
    const Mat2 v = t * m * t.transpose();
    sum += v;
    sq += v.cwiseProduct(v);
  }
  MatrixEstimate out;
  const double dn = static_cast<double>(n);
  out.mean = sum / dn;
  const Mat2 variance = (sq / dn - out.mean.cwiseProduct(out.mean)) * dn / (dn - 1.0);
  out.stderr_ = (variance.array().max(0.0) / dn).sqrt().matrix();
  return out;
}

/// Posterior of N(x; m0, P0) times the pseudo-likelihood N(zbar; Hx, E^-1 / m),
/// in information form with full matrix solves.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline GaussianPosterior information_form_update(const Eigen::VectorXd& m0, const Eigen::MatrixXd& p0,
                                                 const Eigen::MatrixXd& h, const Mat2& e, const Vec2& zbar,
                                                 double m) {
  const Eigen::MatrixXd p0_inv = p0.fullPivLu().inverse();
  const Eigen::MatrixXd info = p0_inv + m * h.transpose() * e * h;
  const Eigen::VectorXd vec = p0_inv * m0 + m * h.transpose() * e * zbar;
  GaussianPosterior out;
  out.cov = info.fullPivLu().inverse();
  out.mean = info.fullPivLu().solve(vec);
  return out;
}

/// Product N(y; z, R) N(z; c, A^-1) as a Gaussian in z.
inline GaussianPosterior fuse_two_gaussians(const Vec2& y, const Mat2& r, const Vec2& c, const Mat2& a) {
  const Mat2 r_inv = r.fullPivLu().inverse();
  const Mat2 info = a + r_inv;
  GaussianPosterior out;
  out.cov = info.fullPivLu().inverse();
  out.mean = info.fullPivLu().solve(a * c + r_inv * y);
  return out;
}

/// Relative error with an absolute floor of 1 on the scale.
inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// A four-state constant-velocity model with the position selector.
inline ModelConfig cv_config(double s = 1.0, double r = 1.0) {
  ModelConfig cfg;
  cfg.H = position_selector(4);
  cfg.R = r * Mat2::Identity();
  cfg.s = s;
  set_cv_motion(cfg, 0.1, 1.0, 0.01);
  cfg.gamma = 0.99;
  cfg.max_iterations = 10;
  return cfg;
}

inline TargetBelief random_belief(Rng& rng) {
  TargetBelief b;
  Eigen::Vector4d mean(uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -5, 5), uniform(rng, -5, 5));
  b.kinematics = GaussianKinematics::make(mean, random_spd(rng, 4, 0.5, 4.0));
  b.orientation = {uniform(rng, -std::numbers::pi, std::numbers::pi), uniform(rng, 0.01, 1.0)};
  b.extent = {Vec2(uniform(rng, 2.0, 20.0), uniform(rng, 2.0, 20.0)),
              Vec2(uniform(rng, 5.0, 200.0), uniform(rng, 5.0, 200.0))};
  return b;
}

/// Points scattered around `center` with an anisotropic spread.
inline MeasurementBatch random_batch(Rng& rng, const Vec2& center, int m, double spread = 10.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Mat2 shape = rot(uniform(rng, 0.0, std::numbers::pi)) *
                     Vec2(spread, 0.3 * spread).asDiagonal();
  MeasurementBatch batch;
  for (int j = 0; j < m; ++j) batch.points.push_back(center + shape * Vec2(normal(rng), normal(rng)));
  return batch;
}

inline bool is_psd(const Eigen::MatrixXd& m, double tol = 0.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace ettvb::testing

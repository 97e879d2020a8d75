#include "ettvb/measurement_update.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "ettvb/rotation.hpp"

namespace ettvb {

namespace {

MeasurementBatch canonical_order(const MeasurementBatch& batch) {
  MeasurementBatch sorted = batch;
  std::sort(sorted.points.begin(), sorted.points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  return sorted;
}

Mat2 sym(const Mat2& m) { return 0.5 * (m + m.transpose()); }

Vec2 mean_of(const std::vector<Vec2>& points) {
  Vec2 sum = Vec2::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

// KL(IG(a, b) || IG(a0, b0)); identical to the Gamma KL of the reciprocal.
double inverse_gamma_kl(double a, double b, double a0, double b0) {
  return (a - a0) * boost::math::digamma(a) - std::lgamma(a) + std::lgamma(a0) +
         a0 * (std::log(b) - std::log(b0)) + a * (b0 - b) / b;
}

}  // namespace

IterationState init_iteration(const TargetBelief& prior, const MeasurementBatch& batch,
                              const ModelConfig& cfg) {
  if (batch.empty()) {
    throw std::invalid_argument("init_iteration needs at least one measurement");
  }
  IterationState state;
  state.qx = prior.kinematics;
  state.qtheta = prior.orientation;
  state.qX = prior.extent;
  state.z_means = batch.points;
  // E[s T X T^T] under the prior factors: E[sX] carried into the measurement
  // frame, so the starting point does not depend on the choice of axes.
  const Vec2 body = cfg.s * extent_mean(prior.extent).diagonal();
  state.z_cov = sym(expected_rotated_inverse_diag(body, prior.orientation.mean, prior.orientation.variance));
  state.iteration = 0;
  return state;
}

CrossExpectations compute_expectations(const IterationState& state, const ModelConfig& cfg) {
  CrossExpectations exps;
  exps.inv_extent = state.qX.shape.array() / (cfg.s * state.qX.scale.array());
  exps.inv_rotated_extent =
      sym(expected_rotated_inverse_diag(exps.inv_extent, state.qtheta.mean, state.qtheta.variance));

  const Vec2 predicted = cfg.H * state.qx.mean;
  const Mat2 spread = sym(cfg.H * state.qx.covariance * cfg.H.transpose()) + state.z_cov;

  exps.residual_outer.reserve(state.z_means.size());
  exps.rotated_residual_outer.reserve(state.z_means.size());
  for (const auto& z : state.z_means) {
    const Vec2 r = z - predicted;
    const Mat2 outer = sym(spread + r * r.transpose());
    exps.residual_outer.push_back(outer);
    // T^T = T(-theta), and -theta ~ N(-mean, variance).
    exps.rotated_residual_outer.push_back(
        sym(expected_rotated_inverse(outer, -state.qtheta.mean, state.qtheta.variance)));
  }
  return exps;
}

GaussianKinematics update_qx(const IterationState& state, const CrossExpectations& exps,
                             const MeasurementBatch& batch, const TargetBelief& prior,
                             const ModelConfig& cfg) {
  const auto m = static_cast<double>(batch.size());
  if (batch.empty()) {
    return prior.kinematics;
  }
  const Eigen::MatrixXd& p_prior = prior.kinematics.covariance;
  if (Eigen::LLT<Eigen::MatrixXd>(p_prior).info() != Eigen::Success) {
    throw NumericError("prior kinematic covariance is singular");
  }

  // Pseudo-measurement zbar ~ N(Hx, E[(sTXT^T)^-1]^-1 / m), applied in Kalman form.
  const Vec2 z_bar = mean_of(state.z_means);
  const Mat2 pseudo_cov = inverse_2x2(exps.inv_rotated_extent, "E[(sTXT')^-1]") / m;
  const Eigen::MatrixXd pht = p_prior * cfg.H.transpose();
  const Mat2 innovation_cov = sym(cfg.H * pht + pseudo_cov);
  const Eigen::MatrixXd gain = pht * inverse_2x2(innovation_cov, "innovation covariance");

  const Eigen::Index n = p_prior.rows();
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - gain * cfg.H;

  GaussianKinematics out;
  out.mean = prior.kinematics.mean + gain * (z_bar - cfg.H * prior.kinematics.mean);
  out.covariance =
      symmetrized(ikh * p_prior * ikh.transpose() + gain * pseudo_cov * gain.transpose());
  return out;
}

OrientationBelief update_qtheta(const IterationState& state, const CrossExpectations& exps,
                                const MeasurementBatch& batch, const TargetBelief& prior,
                                const ModelConfig& /*cfg*/) {
  const double prior_var = prior.orientation.variance;
  if (!(prior_var > 0.0)) {
    throw NumericError("degenerate orientation prior: variance must be positive");
  }
  if (batch.empty()) {
    return prior.orientation;
  }

  // Linearize T^T(z - Hx) around the current iterate.
  const double lin_point = state.qtheta.mean;
  const Mat2 t = rotation(lin_point);
  const Mat2 dt = rotation_derivative(lin_point);
  const Mat2 w = exps.inv_extent.asDiagonal();

  Mat2 outer_sum = Mat2::Zero();
  for (const auto& r : exps.residual_outer) outer_sum += r;

  const double info = (w * dt.transpose() * outer_sum * dt).trace();
  const double cross = (w * t.transpose() * outer_sum * dt).trace();
  const double shift = info * lin_point - cross;

  OrientationBelief out;
  out.variance = 1.0 / (1.0 / prior_var + info);
  out.mean = out.variance * (prior.orientation.mean / prior_var + shift);
  return out;
}

ExtentBelief update_qX(const IterationState& /*state*/, const CrossExpectations& exps,
                       const MeasurementBatch& batch, const TargetBelief& prior,
                       const ModelConfig& cfg) {
  ExtentBelief out = prior.extent;
  out.shape.array() += 0.5 * static_cast<double>(batch.size());
  Vec2 spread = Vec2::Zero();
  for (const auto& r : exps.rotated_residual_outer) spread += r.diagonal();
  out.scale += spread / (2.0 * cfg.s);
  return out;
}

NoiseFreeMeasurements update_qz(const IterationState& state, const CrossExpectations& exps,
                                const MeasurementBatch& batch, const TargetBelief& /*prior*/,
                                const ModelConfig& cfg) {
  const Mat2 r_inv = inverse_2x2(cfg.R, "measurement noise covariance R");
  NoiseFreeMeasurements out;
  out.cov = sym(inverse_2x2(exps.inv_rotated_extent + r_inv, "noise-free measurement precision"));
  const Vec2 prior_info = exps.inv_rotated_extent * (cfg.H * state.qx.mean);
  out.means.reserve(batch.size());
  for (const auto& y : batch.points) {
    out.means.push_back(out.cov * (prior_info + r_inv * y));
  }
  return out;
}

double evidence_lower_bound(const IterationState& state, const CrossExpectations& exps,
                            const MeasurementBatch& batch, const TargetBelief& prior,
                            const ModelConfig& cfg) {
  constexpr double log_two_pi = 1.8378770664093453;  // log(2 pi)
  const auto m = static_cast<double>(batch.size());
  const Mat2 r_inv = inverse_2x2(cfg.R, "R");

  double elbo = 0.0;

  // E[log p(Y | Z)] + E[log p(Z | x, X, theta)]
  const Vec2 log_sigma = state.qX.scale.array().log() -
                         state.qX.shape.unaryExpr([](double a) { return boost::math::digamma(a); })
                             .array();
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Vec2 e = batch.points[j] - state.z_means[j];
    elbo += -log_two_pi - 0.5 * std::log(cfg.R.determinant()) -
            0.5 * (r_inv * (e * e.transpose() + state.z_cov)).trace();
    elbo += -log_two_pi - 0.5 * (2.0 * std::log(cfg.s) + log_sigma.sum()) -
            0.5 * exps.inv_extent.dot(exps.rotated_residual_outer[j].diagonal());
  }

  // Entropy of q_Z.
  elbo += m * (1.0 + log_two_pi + 0.5 * std::log(state.z_cov.determinant()));

  // - KL(q_x || p_x)
  {
    const auto& p0 = prior.kinematics.covariance;
    Eigen::LLT<Eigen::MatrixXd> llt0(p0);
    const Eigen::VectorXd d = prior.kinematics.mean - state.qx.mean;
    const double n = static_cast<double>(d.size());
    const double log_det0 = 2.0 * llt0.matrixL().toDenseMatrix().diagonal().array().log().sum();
    Eigen::LLT<Eigen::MatrixXd> llt1(state.qx.covariance);
    const double log_det1 = 2.0 * llt1.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double kl = 0.5 * (llt0.solve(state.qx.covariance).trace() + d.dot(llt0.solve(d)) - n +
                             log_det0 - log_det1);
    elbo -= kl;
  }
  // - KL(q_theta || p_theta)
  {
    const double v0 = prior.orientation.variance;
    const double v1 = state.qtheta.variance;
    const double d = prior.orientation.mean - state.qtheta.mean;
    elbo -= 0.5 * (v1 / v0 + d * d / v0 - 1.0 + std::log(v0 / v1));
  }
  // - KL(q_X || p_X)
  for (int i = 0; i < 2; ++i) {
    elbo -= inverse_gamma_kl(state.qX.shape(i), state.qX.scale(i), prior.extent.shape(i),
                             prior.extent.scale(i));
  }
  return elbo;
}

TargetBelief measurement_update(const TargetBelief& prior, const MeasurementBatch& batch,
                                const ModelConfig& cfg, const UpdateOptions& options) {
  prior.validate();
  cfg.validate_for(prior.kinematics.dim());
  batch.validate();
  if (batch.empty()) {
    return prior;
  }

  const MeasurementBatch ordered = canonical_order(batch);
  IterationState state = init_iteration(prior, ordered, cfg);

  for (int sweep = 0; sweep < cfg.max_iterations; ++sweep) {
    const char* stage = "expectations";
    double change = 0.0;
    try {
      const CrossExpectations exps = compute_expectations(state, cfg);
      stage = "q_x";
      GaussianKinematics qx = update_qx(state, exps, ordered, prior, cfg);
      stage = "q_theta";
      OrientationBelief qtheta = update_qtheta(state, exps, ordered, prior, cfg);
      stage = "q_X";
      ExtentBelief qX = update_qX(state, exps, ordered, prior, cfg);
      stage = "q_Z";
      NoiseFreeMeasurements qz = update_qz(state, exps, ordered, prior, cfg);

      change = std::max({(qx.mean - state.qx.mean).cwiseAbs().maxCoeff(),
                         std::abs(qtheta.mean - state.qtheta.mean),
                         (qX.shape - state.qX.shape).cwiseAbs().maxCoeff(),
                         (qX.scale - state.qX.scale).cwiseAbs().maxCoeff()});

      state.qx = std::move(qx);
      state.qtheta = qtheta;
      state.qX = qX;
      state.z_means = std::move(qz.means);
      state.z_cov = qz.cov;
      state.iteration = sweep + 1;

      if (options.trace) {
        stage = "diagnostics";
        SweepRecord rec;
        rec.iteration = state.iteration;
        rec.x_mean = state.qx.mean;
        rec.theta_mean = state.qtheta.mean;
        rec.theta_variance = state.qtheta.variance;
        rec.alpha = state.qX.shape;
        rec.beta = state.qX.scale;
        rec.elbo = evidence_lower_bound(state, compute_expectations(state, cfg), ordered, prior, cfg);
        options.trace(rec);
      }
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(sweep) + ", " + stage + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw NumericError("iteration " + std::to_string(sweep) + ", " + stage + ": " + e.what());
    }
    if (cfg.early_stop_tolerance > 0.0 && change < cfg.early_stop_tolerance) {
      break;
    }
  }

  TargetBelief posterior;
  posterior.kinematics = std::move(state.qx);
  posterior.orientation = state.qtheta;
  posterior.extent = state.qX;
  return posterior;
}

}  // namespace ettvb

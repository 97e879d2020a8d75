#pragma once

#include <functional>
#include <vector>

#include "ettvb/core_state.hpp"

namespace ettvb {

/// Iterates of the fixed-point measurement update, including the instrumental
/// noise-free measurements z^j ~ N(z_means[j], z_cov).
struct IterationState {
  GaussianKinematics qx;
  OrientationBelief qtheta;
  ExtentBelief qX;
  std::vector<Vec2> z_means;
  Mat2 z_cov = Mat2::Identity();  // shared across measurements
  int iteration = 0;
};

/// Expectations under the current factors that every sub-update consumes.
struct CrossExpectations {
  Mat2 inv_rotated_extent;               // E[(s T X T^T)^-1]
  Vec2 inv_extent;                       // diagonal of E[(s X)^-1]
  std::vector<Mat2> residual_outer;      // E[(z_j - Hx)(z_j - Hx)^T]
  std::vector<Mat2> rotated_residual_outer;  // E[T^T (z_j - Hx)(.)^T T]
};

struct NoiseFreeMeasurements {
  std::vector<Vec2> means;
  Mat2 cov;
};

/// One record per completed sweep, for diagnostics.
struct SweepRecord {
  int iteration = 0;
  Eigen::VectorXd x_mean;
  double theta_mean = 0.0;
  double theta_variance = 0.0;
  Vec2 alpha;
  Vec2 beta;
  double elbo = 0.0;  // evidence lower bound of the factorized posterior; not monotone
};

struct UpdateOptions {
  std::function<void(const SweepRecord&)> trace;
};

/// z_means = measurements, z_cov = E[s T X T^T] under the prior orientation and
/// extent (E[sX] when the orientation is zero), belief iterates copied from the prior.
IterationState init_iteration(const TargetBelief& prior, const MeasurementBatch& batch,
                              const ModelConfig& cfg);

CrossExpectations compute_expectations(const IterationState& state, const ModelConfig& cfg);

GaussianKinematics update_qx(const IterationState& state, const CrossExpectations& exps,
                             const MeasurementBatch& batch, const TargetBelief& prior,
                             const ModelConfig& cfg);

OrientationBelief update_qtheta(const IterationState& state, const CrossExpectations& exps,
                                const MeasurementBatch& batch, const TargetBelief& prior,
                                const ModelConfig& cfg);

ExtentBelief update_qX(const IterationState& state, const CrossExpectations& exps,
                       const MeasurementBatch& batch, const TargetBelief& prior,
                       const ModelConfig& cfg);

NoiseFreeMeasurements update_qz(const IterationState& state, const CrossExpectations& exps,
                                const MeasurementBatch& batch, const TargetBelief& prior,
                                const ModelConfig& cfg);

/// Evidence lower bound of the factorized approximation in `state`.
double evidence_lower_bound(const IterationState& state, const CrossExpectations& exps,
                            const MeasurementBatch& batch, const TargetBelief& prior,
                            const ModelConfig& cfg);

/// Variational measurement update. Runs cfg.max_iterations sweeps of
/// (expectations, q_x, q_theta, q_X, q_Z); every sub-update in a sweep reads
/// the iterates from the start of that sweep. An empty batch returns the prior.
///
/// The batch is processed in a canonical (lexicographic) order so the result
/// is bit-identical under any permutation of the measurements.
TargetBelief measurement_update(const TargetBelief& prior, const MeasurementBatch& batch,
                                const ModelConfig& cfg, const UpdateOptions& options = {});

}  // namespace ettvb

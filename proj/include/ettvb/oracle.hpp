#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ettvb/core_state.hpp"

namespace ettvb {

/// Importance-sampled representation of the exact single-update posterior:
/// draws from the prior, weighted by the exact measurement likelihood.
struct WeightedParticleCloud {
  Eigen::MatrixXd kinematics;  // n_x x N, one column per sample
  std::vector<double> theta;
  Eigen::Matrix2Xd sigma;      // extent diagonal per sample
  std::vector<double> log_weights;

  [[nodiscard]] std::size_t size() const { return log_weights.size(); }
  /// Normalized weights; throws NumericError if every weight underflowed.
  [[nodiscard]] std::vector<double> normalized_weights() const;
  [[nodiscard]] double effective_sample_size() const;
};

struct OracleOptions {
  std::size_t block_size = 1 << 15;  // samples per independent RNG substream
  int workers = 1;
};

/// Samples n_samples draws from the prior families and weights each with
/// sum_j log N(y_j; Hx, s T X T^T + R). The result depends only on (seed,
/// block_size), never on the worker count.
WeightedParticleCloud oracle_posterior(const TargetBelief& prior, const MeasurementBatch& batch,
                                       const ModelConfig& cfg, std::size_t n_samples,
                                       std::uint64_t seed, const OracleOptions& options = {});

struct OracleSummary {
  Eigen::VectorXd kinematics;  // componentwise weighted medians
  double theta = 0.0;
  Vec2 sigma = Vec2::Zero();
  double effective_sample_size = 0.0;
};

/// Componentwise weighted medians. Orientation samples are first folded into a
/// window of width pi centered on their weighted axial mean, because theta and
/// theta + pi describe the same ellipse.
OracleSummary oracle_summary(const WeightedParticleCloud& cloud);

/// CSV with one row per sample: x0..x{n-1}, theta, sigma1, sigma2, log_weight, weight.
void write_cloud_csv(const WeightedParticleCloud& cloud, const std::filesystem::path& path);

/// Smallest value whose cumulative weight reaches half of the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

}  // namespace ettvb

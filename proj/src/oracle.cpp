#include "ettvb/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "ettvb/metrics.hpp"
#include "ettvb/rotation.hpp"
#include "ettvb/simulator.hpp"

namespace ettvb {

namespace {

constexpr std::uint64_t kOracleStream = 0x6f7261636c65ULL;

}  // namespace

std::vector<double> WeightedParticleCloud::normalized_weights() const {
  double max_log = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isfinite(lw)) max_log = std::max(max_log, lw);
  }
  if (!std::isfinite(max_log)) {
    throw NumericError("degenerate oracle: every importance weight underflowed");
  }
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::isfinite(log_weights[i]) ? std::exp(log_weights[i] - max_log) : 0.0;
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

double WeightedParticleCloud::effective_sample_size() const {
  const auto w = normalized_weights();
  double sq = 0.0;
  for (double x : w) sq += x * x;
  return 1.0 / sq;
}

WeightedParticleCloud oracle_posterior(const TargetBelief& prior, const MeasurementBatch& batch,
                                       const ModelConfig& cfg, std::size_t n_samples,
                                       std::uint64_t seed, const OracleOptions& options) {
  if (n_samples == 0) throw std::invalid_argument("oracle needs at least one sample");
  if (options.block_size == 0) throw std::invalid_argument("oracle block size must be positive");
  prior.validate();
  cfg.validate_for(prior.kinematics.dim());
  batch.validate();

  // Product likelihood: accumulate in a canonical order so permutations of the
  // batch give identical weights.
  std::vector<Vec2> points = batch.points;
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });

  const Eigen::Index n_x = prior.kinematics.dim();
  const Eigen::MatrixXd chol = prior.kinematics.covariance.llt().matrixL();
  const double theta_sd = std::sqrt(prior.orientation.variance);
  const Eigen::MatrixXd h = cfg.H;
  const Mat2 r = cfg.R;
  const double s = cfg.s;

  WeightedParticleCloud cloud;
  cloud.kinematics.resize(n_x, static_cast<Eigen::Index>(n_samples));
  cloud.theta.resize(n_samples);
  cloud.sigma.resize(2, static_cast<Eigen::Index>(n_samples));
  cloud.log_weights.resize(n_samples);

  const std::size_t n_blocks = (n_samples + options.block_size - 1) / options.block_size;
  std::atomic<std::size_t> next_block{0};

  auto work = [&]() {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd noise(n_x);
    for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
      Rng rng = make_stream(seed, b, kOracleStream);
      std::gamma_distribution<double> gamma0(prior.extent.shape(0), 1.0);
      std::gamma_distribution<double> gamma1(prior.extent.shape(1), 1.0);
      const std::size_t begin = b * options.block_size;
      const std::size_t end = std::min(n_samples, begin + options.block_size);
      for (std::size_t i = begin; i < end; ++i) {
        for (Eigen::Index d = 0; d < n_x; ++d) noise(d) = normal(rng);
        const Eigen::VectorXd x = prior.kinematics.mean + chol * noise;
        const double theta = prior.orientation.mean + theta_sd * normal(rng);
        const Vec2 sigma(prior.extent.scale(0) / gamma0(rng), prior.extent.scale(1) / gamma1(rng));

        const Mat2 t = rotation(theta);
        const Mat2 cov = s * t * sigma.asDiagonal() * t.transpose() + r;
        const double det = cov.determinant();
        double log_w = -std::numeric_limits<double>::infinity();
        if (det > 0.0 && std::isfinite(det)) {
          Mat2 inv;
          inv << cov(1, 1), -cov(0, 1), -cov(1, 0), cov(0, 0);
          inv /= det;
          const Vec2 center = h * x;
          const double log_norm = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
          log_w = 0.0;
          for (const Vec2& y : points) {
            const Vec2 e = y - center;
            log_w += log_norm - 0.5 * e.dot(inv * e);
          }
          if (std::isnan(log_w)) log_w = -std::numeric_limits<double>::infinity();
        }

        const auto col = static_cast<Eigen::Index>(i);
        cloud.kinematics.col(col) = x;
        cloud.theta[i] = theta;
        cloud.sigma.col(col) = sigma;
        cloud.log_weights[i] = log_w;
      }
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(n_blocks)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // Surface degeneracy at construction.
  (void)cloud.normalized_weights();
  return cloud;
}

void write_cloud_csv(const WeightedParticleCloud& cloud, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
  const std::vector<double> w = cloud.normalized_weights();
  for (Eigen::Index d = 0; d < cloud.kinematics.rows(); ++d) std::fprintf(f, "x%ld,", static_cast<long>(d));
  std::fprintf(f, "theta,sigma1,sigma2,log_weight,weight\n");
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    for (Eigen::Index d = 0; d < cloud.kinematics.rows(); ++d) std::fprintf(f, "%.17g,", cloud.kinematics(d, col));
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", cloud.theta[i], cloud.sigma(0, col), cloud.sigma(1, col),
                 cloud.log_weights[i], w[i]);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("error while writing " + path.string());
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty()) {
    throw std::invalid_argument("weighted_median needs matching, non-empty inputs");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw NumericError("weighted_median: weights sum to zero");
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    cumulative += weights[idx];
    if (cumulative >= 0.5 * total) return values[idx];
  }
  return values[order.back()];
}

OracleSummary oracle_summary(const WeightedParticleCloud& cloud) {
  if (cloud.size() == 0) throw NumericError("empty oracle cloud");
  const std::vector<double> w = cloud.normalized_weights();
  const std::size_t n = cloud.size();

  OracleSummary out;
  double sq = 0.0;
  for (double x : w) sq += x * x;
  out.effective_sample_size = 1.0 / sq;

  const Eigen::Index n_x = cloud.kinematics.rows();
  out.kinematics.resize(n_x);
  std::vector<double> buf(n);
  for (Eigen::Index d = 0; d < n_x; ++d) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = cloud.kinematics(d, static_cast<Eigen::Index>(i));
    out.kinematics(d) = weighted_median(buf, w);
  }
  for (int a = 0; a < 2; ++a) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = cloud.sigma(a, static_cast<Eigen::Index>(i));
    out.sigma(a) = weighted_median(buf, w);
  }

  // Axial mean of the orientation: half the angle of the weighted mean of 2theta.
  double c = 0.0;
  double s = 0.0;
  double raw_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c += w[i] * std::cos(2.0 * cloud.theta[i]);
    s += w[i] * std::sin(2.0 * cloud.theta[i]);
    raw_mean += cloud.theta[i];
  }
  raw_mean /= static_cast<double>(n);
  const double center = 0.5 * std::atan2(s, c);
  for (std::size_t i = 0; i < n; ++i) buf[i] = center + wrap_axial(cloud.theta[i] - center);
  const double median = weighted_median(buf, w);
  // Report in the branch nearest the sampled (prior) angles.
  out.theta = median + std::numbers::pi * std::round((raw_mean - median) / std::numbers::pi);
  return out;
}

}  // namespace ettvb

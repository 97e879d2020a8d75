#include "ettvb/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "ettvb/oracle.hpp"
#include "ettvb/rotation.hpp"
#include "ettvb/time_update.hpp"

namespace ettvb {

namespace {

constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kMeasurementStream = 2;

}  // namespace

RunResult run_single(const ScenarioSpec& spec, int run, const CampaignOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto index = static_cast<std::uint64_t>(run);
  Rng truth_rng = make_stream(spec.seed, index, kTruthStream);
  Rng meas_rng = make_stream(spec.seed, index, kMeasurementStream);

  const std::vector<GroundTruthState> truth = simulate_trajectory(spec, truth_rng);

  RunResult out;
  out.run = run;
  out.seed = spec.seed;
  out.steps.reserve(truth.size());

  TargetBelief belief = spec.prior;
  double sum_sq_heading = 0.0;
  for (int k = 0; k < spec.steps; ++k) {
    const GroundTruthState& gt = truth[static_cast<std::size_t>(k)];
    if (k > 0) belief = time_update(belief, spec.model);
    const MeasurementBatch batch = generate_measurements(gt, spec, meas_rng);

    UpdateOptions update_options;
    if (run == 0 && options.trace) {
      update_options.trace = [&options, k](const SweepRecord& r) { options.trace(k, r); };
    }
    belief = measurement_update(belief, batch, spec.model, update_options);

    StepRecord rec;
    rec.step = k;
    rec.measurements = static_cast<int>(batch.size());
    rec.truth = gt;
    rec.est_position = spec.model.H * belief.kinematics.mean;
    rec.est_orientation = belief.orientation.mean;
    rec.est_extent_diag = extent_mean(belief.extent).diagonal();

    const Mat2 t_true = rotation(gt.orientation);
    const Mat2 x_true = t_true * gt.extent_diag.asDiagonal() * t_true.transpose();
    rec.gw = gw_distance(rec.est_position, estimated_extent_matrix(belief), gt.position, x_true);

    const double diff = rec.est_orientation - gt.orientation;
    rec.heading_error = options.wrap == HeadingWrap::Axial ? wrap_axial(diff) : diff;
    sum_sq_heading += rec.heading_error * rec.heading_error;

    out.mean_gw += rec.gw.distance;
    out.mean_center_term += rec.gw.center_term;
    out.mean_extent_term += rec.gw.extent_term;
    out.steps.push_back(rec);
  }

  const double n = static_cast<double>(spec.steps);
  out.mean_gw /= n;
  out.mean_center_term /= n;
  out.mean_extent_term /= n;
  out.heading_rmse_deg = std::sqrt(sum_sq_heading / n) * 180.0 / std::numbers::pi;
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

Aggregate aggregate_runs(const std::vector<RunResult>& runs) {
  std::vector<double> gw;
  std::vector<double> center;
  std::vector<double> extent;
  std::vector<double> heading;
  for (const RunResult& r : runs) {
    gw.push_back(r.mean_gw);
    center.push_back(r.mean_center_term);
    extent.push_back(r.mean_extent_term);
    heading.push_back(r.heading_rmse_deg);
  }
  return Aggregate{mean_std(gw), mean_std(center), mean_std(extent), mean_std(heading)};
}

CampaignReport run_campaign(const ScenarioSpec& spec, const CampaignOptions& options) {
  spec.validate();
  if (spec.trajectory == TrajectoryKind::ParkedReplay) {
    // Read once up front so a bad file is reported as a configuration problem.
    Rng probe = make_stream(spec.seed, 0, kTruthStream);
    (void)simulate_trajectory(spec, probe);
  }

  CampaignReport report;
  report.spec = spec;
  report.wrap = options.wrap;
  report.runs.resize(static_cast<std::size_t>(spec.runs));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  int failed_run = -1;
  std::string failure;

  auto work = [&]() {
    for (int r = next++; r < spec.runs && !failed; r = next++) {
      try {
        report.runs[static_cast<std::size_t>(r)] = run_single(spec, r, options);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (failed_run < 0 || r < failed_run) {
          failed_run = r;
          failure = e.what();
        }
        failed = true;
      }
    }
  };

  const int workers = std::max(1, std::min(options.workers, std::max(1, spec.runs)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (failed) {
    throw std::runtime_error("run " + std::to_string(failed_run) + " (seed " +
                             std::to_string(spec.seed) + ") failed: " + failure);
  }
  report.aggregate = aggregate_runs(report.runs);
  return report;
}

OracleComparison compare_with_oracle(const ScenarioSpec& spec, std::size_t n_samples, int workers,
                                     const std::filesystem::path& dump_csv) {
  spec.validate();
  Rng truth_rng = make_stream(spec.seed, 0, kTruthStream);
  Rng meas_rng = make_stream(spec.seed, 0, kMeasurementStream);
  const GroundTruthState gt = simulate_trajectory(spec, truth_rng).front();
  const MeasurementBatch batch = generate_measurements(gt, spec, meas_rng);

  OracleComparison out;
  out.measurements = static_cast<int>(batch.size());
  out.prior = spec.prior;
  out.posterior = measurement_update(spec.prior, batch, spec.model);
  ModelConfig single = spec.model;
  single.max_iterations = 1;
  out.one_sweep = measurement_update(spec.prior, batch, single);

  OracleOptions oracle_options;
  oracle_options.workers = workers;
  std::size_t samples = n_samples;
  OracleSummary summary;
  for (int attempt = 0;; ++attempt) {
    const WeightedParticleCloud cloud =
        oracle_posterior(spec.prior, batch, spec.model, samples, spec.seed, oracle_options);
    summary = oracle_summary(cloud);
    if (summary.effective_sample_size > 100.0 || attempt == 4) {
      if (!dump_csv.empty()) write_cloud_csv(cloud, dump_csv);
      break;
    }
    samples *= 2;
  }
  out.samples = samples;
  out.effective_sample_size = summary.effective_sample_size;
  out.oracle_center = spec.model.H * summary.kinematics;
  out.oracle_theta = summary.theta;
  const Mat2 t = rotation(summary.theta);
  out.oracle_extent = t * summary.sigma.asDiagonal() * t.transpose();

  auto against_oracle = [&](const TargetBelief& b) {
    return gw_distance(spec.model.H * b.kinematics.mean, estimated_extent_matrix(b), out.oracle_center,
                       out.oracle_extent);
  };
  out.prior_to_oracle = against_oracle(out.prior);
  out.posterior_to_oracle = against_oracle(out.posterior);
  out.one_sweep_to_oracle = against_oracle(out.one_sweep);
  return out;
}

}  // namespace ettvb

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ettvb/measurement_update.hpp"
#include "ettvb/metrics.hpp"
#include "ettvb/simulator.hpp"

namespace ettvb {

struct StepRecord {
  int step = 0;
  int measurements = 0;
  GroundTruthState truth;
  Vec2 est_position = Vec2::Zero();
  double est_orientation = 0.0;
  Vec2 est_extent_diag = Vec2::Zero();  // E[X] in the body frame
  GwBreakdown gw;
  double heading_error = 0.0;  // radians, wrapped per the campaign setting
};

struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;  // master seed; the run's streams derive from (seed, run)
  std::vector<StepRecord> steps;
  double mean_gw = 0.0;
  double mean_center_term = 0.0;
  double mean_extent_term = 0.0;
  double heading_rmse_deg = 0.0;
  double wall_time = 0.0;  // seconds
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); zero for a single run
};

struct Aggregate {
  MeanStd gw;
  MeanStd center_term;
  MeanStd extent_term;
  MeanStd heading_rmse_deg;
};

struct CampaignReport {
  ScenarioSpec spec;
  HeadingWrap wrap = HeadingWrap::Axial;
  std::vector<RunResult> runs;  // indexed by run
  Aggregate aggregate;
};

struct CampaignOptions {
  int workers = 1;
  HeadingWrap wrap = HeadingWrap::Axial;
  /// Sweep diagnostics of run 0, called from whichever worker executes it.
  std::function<void(int step, const SweepRecord&)> trace;
};

/// One Monte-Carlo run: step 0 updates the prior directly, later steps predict
/// then update. Streams are derived from (spec.seed, run).
RunResult run_single(const ScenarioSpec& spec, int run, const CampaignOptions& options = {});

/// Runs spec.runs independent runs, in parallel up to options.workers. The
/// spec is validated (and any truth file read) before the first run starts.
/// A failing run aborts the campaign with a std::runtime_error naming the run
/// index and seed.
CampaignReport run_campaign(const ScenarioSpec& spec, const CampaignOptions& options = {});

/// VB posterior versus the sampled exact posterior for the first scan of run 0.
struct OracleComparison {
  int measurements = 0;
  std::size_t samples = 0;        // after any ESS-driven redraws
  double effective_sample_size = 0.0;
  TargetBelief prior;
  TargetBelief posterior;         // cfg.max_iterations sweeps
  TargetBelief one_sweep;         // a single sweep
  Vec2 oracle_center = Vec2::Zero();
  Mat2 oracle_extent = Mat2::Zero();
  double oracle_theta = 0.0;
  GwBreakdown prior_to_oracle;
  GwBreakdown posterior_to_oracle;
  GwBreakdown one_sweep_to_oracle;
};

/// Draws the first batch of run 0 from the scenario, then compares the VB
/// update with an importance-sampled oracle of n_samples draws. The sample
/// count is doubled (at most four times) while the effective sample size is
/// 100 or below. A non-empty dump_csv receives the final weighted samples.
OracleComparison compare_with_oracle(const ScenarioSpec& spec, std::size_t n_samples, int workers = 1,
                                     const std::filesystem::path& dump_csv = {});

MeanStd mean_std(std::span<const double> values);
Aggregate aggregate_runs(const std::vector<RunResult>& runs);

}  // namespace ettvb

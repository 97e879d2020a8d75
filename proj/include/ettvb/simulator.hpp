#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ettvb/core_state.hpp"

namespace ettvb {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, index, purpose). Distinct inputs give
/// unrelated streams; identical inputs give the same stream.
Rng make_stream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t purpose = 0);

enum class TrajectoryKind { ConstantVelocity, WaypointTurn, ParkedReplay };
enum class MeasurementLaw { Gaussian, UniformEllipse };

struct GroundTruthState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double orientation = 0.0;
  Vec2 extent_diag{1.0, 1.0};  // diagonal of the true extent matrix (squared semi-axes)
};

/// Straight segments joined by constant-rate arcs, driven at fixed speed.
struct TurnGeometry {
  double speed = 50.0 / 3.6;           // m/s
  double segment_duration = 30.0;      // s, per straight segment
  double arc_duration = 10.0;          // s, per turn
  std::vector<double> turn_angles_deg{45.0, 90.0, 90.0};
  double initial_heading = 0.0;        // rad
};

struct ScenarioSpec {
  std::string name = "scenario";
  TrajectoryKind trajectory = TrajectoryKind::ConstantVelocity;
  int steps = 100;
  double sample_time = 0.1;
  MeasurementLaw law = MeasurementLaw::Gaussian;
  double mean_measurements = 10.0;  // Poisson rate per scan
  bool poisson_count = true;        // false: exactly round(mean_measurements) points per scan

  ModelConfig model;
  TargetBelief prior;

  GroundTruthState truth_start;
  bool truth_process_noise = true;  // constant-velocity truth is driven by the model's Q
  TurnGeometry turn;
  std::filesystem::path truth_file;  // parked-replay source, CSV in the truth export schema

  int runs = 100;
  std::uint64_t seed = 1;
  std::vector<int> plot_frames;

  void validate() const;
};

/// Truth propagated with the model's F (and Q noise when enabled). Requires a
/// four-component kinematic state [px, py, vx, vy].
std::vector<GroundTruthState> simulate_cv_trajectory(const ScenarioSpec& spec, Rng& rng);

/// Deterministic piecewise path; orientation follows the velocity heading.
std::vector<GroundTruthState> simulate_turn_trajectory(const ScenarioSpec& spec);

/// Dispatches on spec.trajectory.
std::vector<GroundTruthState> simulate_trajectory(const ScenarioSpec& spec, Rng& rng);

/// Poisson (or fixed) number of points. Gaussian law: N(position, s T X T^T + R).
/// Uniform law: uniform inside {u : u^T (T X T^T)^-1 u <= 1} around the
/// position, plus N(0, R) noise. R only needs to be positive semi-definite here.
MeasurementBatch generate_measurements(const GroundTruthState& truth, const ScenarioSpec& spec,
                                       Rng& rng);

/// Noise-free uniform draw from the oriented ellipse, relative to its center.
Vec2 sample_uniform_ellipse(const Vec2& extent_diag, double orientation, Rng& rng);

void write_truth_csv(const std::vector<GroundTruthState>& truth, const std::filesystem::path& path);
std::vector<GroundTruthState> read_truth_csv(const std::filesystem::path& path);

/// Factor L with L L^T = cov for a PSD matrix; negative eigenvalues are clamped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov);

}  // namespace ettvb

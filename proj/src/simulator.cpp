#include "ettvb/simulator.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ettvb/rotation.hpp"

namespace ettvb {

Rng make_stream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(purpose >> 32)};
  return Rng(seq);
}

void ScenarioSpec::validate() const {
  if (steps < 1) throw ConfigError("scenario needs at least one step");
  if (!(sample_time > 0.0)) throw ConfigError("sample_time must be positive");
  if (!(mean_measurements > 0.0)) throw ConfigError("mean measurement count must be positive");
  if (runs < 0) throw ConfigError("run count must be nonnegative");
  if ((truth_start.extent_diag.array() <= 0.0).any()) {
    throw ConfigError("true extent must be positive");
  }
  prior.validate();
  model.validate_for(prior.kinematics.dim());
  if (trajectory == TrajectoryKind::ConstantVelocity && prior.kinematics.dim() != 4) {
    throw ConfigError("constant-velocity truth needs a [px, py, vx, vy] kinematic state");
  }
  if (trajectory == TrajectoryKind::WaypointTurn) {
    if (!(turn.speed > 0.0) || !(turn.segment_duration > 0.0) || !(turn.arc_duration > 0.0)) {
      throw ConfigError("turn geometry durations and speed must be positive");
    }
  }
  if (trajectory == TrajectoryKind::ParkedReplay && truth_file.empty()) {
    throw ConfigError("parked-replay trajectory needs a truth_file");
  }
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(cov));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

std::vector<GroundTruthState> simulate_cv_trajectory(const ScenarioSpec& spec, Rng& rng) {
  const ModelConfig& cfg = spec.model;
  if (cfg.F.rows() != 5 || cfg.Q.rows() != 5) {
    throw ConfigError("constant-velocity truth needs 5x5 augmented F and Q");
  }
  const Eigen::MatrixXd noise_factor = psd_factor(cfg.Q);
  const bool noisy = spec.truth_process_noise && cfg.Q.cwiseAbs().maxCoeff() > 0.0;

  Eigen::VectorXd x(5);
  x << spec.truth_start.position, spec.truth_start.velocity, spec.truth_start.orientation;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<GroundTruthState> out;
  out.reserve(static_cast<std::size_t>(spec.steps));
  for (int k = 0; k < spec.steps; ++k) {
    GroundTruthState s;
    s.position = x.head<2>();
    s.velocity = x.segment<2>(2);
    s.orientation = x(4);
    s.extent_diag = spec.truth_start.extent_diag;
    out.push_back(s);

    Eigen::VectorXd next = cfg.F * x;
    if (noisy) {
      Eigen::VectorXd w(5);
      for (int i = 0; i < 5; ++i) w(i) = normal(rng);
      next += noise_factor * w;
    }
    x = next;
  }
  return out;
}

namespace {

struct Phase {
  double duration;
  double turn_rate;  // rad/s, zero for straight segments
};

std::vector<Phase> turn_schedule(const TurnGeometry& g) {
  std::vector<Phase> phases;
  phases.push_back({g.segment_duration, 0.0});
  for (double deg : g.turn_angles_deg) {
    phases.push_back({g.arc_duration, deg * std::numbers::pi / 180.0 / g.arc_duration});
    phases.push_back({g.segment_duration, 0.0});
  }
  return phases;
}

// Advances (position, heading) along one phase for dt seconds.
void advance(Vec2& position, double& heading, double speed, double turn_rate, double dt) {
  if (turn_rate == 0.0) {
    position += speed * dt * Vec2(std::cos(heading), std::sin(heading));
    return;
  }
  const double end = heading + turn_rate * dt;
  const double radius = speed / turn_rate;
  position += radius * Vec2(std::sin(end) - std::sin(heading), std::cos(heading) - std::cos(end));
  heading = end;
}

}  // namespace

std::vector<GroundTruthState> simulate_turn_trajectory(const ScenarioSpec& spec) {
  const TurnGeometry& g = spec.turn;
  const std::vector<Phase> phases = turn_schedule(g);

  std::vector<GroundTruthState> out;
  out.reserve(static_cast<std::size_t>(spec.steps));
  for (int k = 0; k < spec.steps; ++k) {
    double remaining = k * spec.sample_time;
    Vec2 position = spec.truth_start.position;
    double heading = g.initial_heading;
    for (const Phase& ph : phases) {
      const double dt = std::min(remaining, ph.duration);
      advance(position, heading, g.speed, ph.turn_rate, dt);
      remaining -= dt;
      if (remaining <= 0.0) break;
    }
    if (remaining > 0.0) {
      advance(position, heading, g.speed, 0.0, remaining);
    }
    GroundTruthState s;
    s.position = position;
    s.velocity = g.speed * Vec2(std::cos(heading), std::sin(heading));
    s.orientation = heading;
    s.extent_diag = spec.truth_start.extent_diag;
    out.push_back(s);
  }
  return out;
}

std::vector<GroundTruthState> simulate_trajectory(const ScenarioSpec& spec, Rng& rng) {
  switch (spec.trajectory) {
    case TrajectoryKind::ConstantVelocity:
      return simulate_cv_trajectory(spec, rng);
    case TrajectoryKind::WaypointTurn:
      return simulate_turn_trajectory(spec);
    case TrajectoryKind::ParkedReplay: {
      auto truth = read_truth_csv(spec.truth_file);
      if (static_cast<int>(truth.size()) < spec.steps) {
        throw ConfigError("truth file " + spec.truth_file.string() + " has fewer rows than steps");
      }
      truth.resize(static_cast<std::size_t>(spec.steps));
      return truth;
    }
  }
  throw ConfigError("unknown trajectory kind");
}

Vec2 sample_uniform_ellipse(const Vec2& extent_diag, double orientation, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = std::sqrt(unit(rng));
  const double angle = 2.0 * std::numbers::pi * unit(rng);
  const Vec2 local(std::sqrt(extent_diag(0)) * radius * std::cos(angle),
                   std::sqrt(extent_diag(1)) * radius * std::sin(angle));
  return rotation(orientation) * local;
}

MeasurementBatch generate_measurements(const GroundTruthState& truth, const ScenarioSpec& spec,
                                       Rng& rng) {
  std::poisson_distribution<int> count(spec.mean_measurements);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = spec.poisson_count ? count(rng) : static_cast<int>(std::lround(spec.mean_measurements));

  const Mat2 noise_factor = psd_factor(spec.model.R);
  const Mat2 t = rotation(truth.orientation);

  MeasurementBatch batch;
  batch.points.reserve(static_cast<std::size_t>(m));
  if (spec.law == MeasurementLaw::Gaussian) {
    const Mat2 cov = spec.model.s * t * truth.extent_diag.asDiagonal() * t.transpose() + spec.model.R;
    const Mat2 factor = psd_factor(cov);
    for (int j = 0; j < m; ++j) {
      const double a = normal(rng);
      const double b = normal(rng);
      batch.points.push_back(truth.position + factor * Vec2(a, b));
    }
  } else {
    for (int j = 0; j < m; ++j) {
      const Vec2 offset = sample_uniform_ellipse(truth.extent_diag, truth.orientation, rng);
      const double a = normal(rng);
      const double b = normal(rng);
      batch.points.push_back(truth.position + offset + noise_factor * Vec2(a, b));
    }
  }
  return batch;
}

void write_truth_csv(const std::vector<GroundTruthState>& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,x,y,vx,vy,theta,ax1,ax2\n";
  char buf[512];
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& s = truth[k];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", k,
                  s.position.x(), s.position.y(), s.velocity.x(), s.velocity.y(), s.orientation,
                  s.extent_diag(0), s.extent_diag(1));
    out << buf;
  }
}

std::vector<GroundTruthState> read_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open truth file " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<GroundTruthState> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 8) throw ConfigError("truth file row must have 8 columns: " + line);
    GroundTruthState s;
    s.position = Vec2(v[1], v[2]);
    s.velocity = Vec2(v[3], v[4]);
    s.orientation = v[5];
    s.extent_diag = Vec2(v[6], v[7]);
    out.push_back(s);
  }
  return out;
}

}  // namespace ettvb

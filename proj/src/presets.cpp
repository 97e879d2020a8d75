#include "ettvb/presets.hpp"

#include <numbers>

namespace ettvb {

void set_cv_motion(ModelConfig& model, double sample_time, double sigma, double q_theta) {
  const double t = sample_time;
  Eigen::Matrix2d f_bar;
  f_bar << 1.0, t, 0.0, 1.0;
  Eigen::Matrix2d q_bar;
  q_bar << t * t * t / 3.0, t * t / 2.0, t * t / 2.0, t;
  q_bar *= sigma * sigma;

  model.F = Eigen::MatrixXd::Zero(5, 5);
  model.Q = Eigen::MatrixXd::Zero(5, 5);
  // State order is [px, py, vx, vy], so the Kronecker factor acts per axis.
  for (int axis = 0; axis < 2; ++axis) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        model.F(2 * r + axis, 2 * c + axis) = f_bar(r, c);
        model.Q(2 * r + axis, 2 * c + axis) = q_bar(r, c);
      }
    }
  }
  model.F(4, 4) = 1.0;
  model.Q(4, 4) = q_theta;
}

Eigen::MatrixXd position_selector(Eigen::Index n_x) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, n_x);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

namespace {

ScenarioSpec cv_scenario(MeasurementLaw law) {
  ScenarioSpec spec;
  spec.name = law == MeasurementLaw::Gaussian ? "cv-gaussian" : "cv-uniform";
  spec.trajectory = TrajectoryKind::ConstantVelocity;
  spec.steps = 100;
  spec.sample_time = 0.1;
  spec.law = law;
  spec.mean_measurements = 10.0;
  spec.runs = 100;
  spec.seed = 1;
  spec.plot_frames = {0, 20, 40, 60, 80, 99};

  ModelConfig& m = spec.model;
  m.H = position_selector(4);
  m.R = 5.0 * Mat2::Identity();
  m.s = law == MeasurementLaw::Gaussian ? 1.0 : 0.25;
  set_cv_motion(m, spec.sample_time, 1.0, 0.01);
  m.gamma = 0.99;
  m.max_iterations = 10;

  spec.prior.kinematics = GaussianKinematics::make(Eigen::Vector4d(0.0, 0.0, 50.0, 0.0),
                                                   Eigen::Matrix4d::Identity());
  spec.prior.orientation = {0.0, 1.0};
  spec.prior.extent = {Vec2(2.0, 2.0), Vec2(100.0, 100.0)};

  spec.truth_start.position = Vec2::Zero();
  spec.truth_start.velocity = Vec2(50.0, 0.0);
  spec.truth_start.orientation = 0.0;
  spec.truth_start.extent_diag = Vec2(50.0, 600.0);
  spec.truth_process_noise = true;
  return spec;
}

ScenarioSpec turn_scenario(MeasurementLaw law) {
  ScenarioSpec spec;
  spec.name = law == MeasurementLaw::Gaussian ? "turns-gaussian" : "turns-uniform";
  spec.trajectory = TrajectoryKind::WaypointTurn;
  spec.sample_time = 1.0;
  spec.turn = TurnGeometry{};
  const double duration = 4.0 * spec.turn.segment_duration +
                          static_cast<double>(spec.turn.turn_angles_deg.size()) * spec.turn.arc_duration;
  spec.steps = static_cast<int>(duration / spec.sample_time);
  spec.law = law;
  spec.mean_measurements = 20.0;
  spec.runs = 100;
  spec.seed = 1;
  spec.plot_frames = {0, 25, 35, 50, 75, 85, 110, 120, 149};

  ModelConfig& m = spec.model;
  m.H = position_selector(4);
  m.R = 400.0 * Mat2::Identity();
  m.s = law == MeasurementLaw::Gaussian ? 1.0 : 0.25;
  set_cv_motion(m, spec.sample_time, 1.0, 0.1);
  m.Q.topLeftCorner(4, 4) = Eigen::Vector4d(100.0, 100.0, 1.0, 1.0).asDiagonal();
  m.gamma = 0.99;
  m.max_iterations = 10;

  spec.prior.kinematics = GaussianKinematics::make(
      Eigen::Vector4d(100.0, 100.0, 5.0, -8.0), Eigen::Vector4d(1e4, 1e4, 100.0, 100.0).asDiagonal());
  spec.prior.orientation = {std::numbers::pi, 1.0};
  spec.prior.extent = {Vec2(5.0, 5.0), Vec2(400.0 * 400.0, 180.0 * 180.0)};

  spec.truth_start.position = Vec2::Zero();
  spec.truth_start.velocity = Vec2(spec.turn.speed, 0.0);
  spec.truth_start.orientation = 0.0;
  spec.truth_start.extent_diag = Vec2(170.0 * 170.0, 40.0 * 40.0);
  spec.truth_process_noise = false;
  return spec;
}

ScenarioSpec single_update_scenario() {
  ScenarioSpec spec;
  spec.name = "single-update-oracle";
  spec.trajectory = TrajectoryKind::ConstantVelocity;
  spec.steps = 1;
  spec.sample_time = 1.0;
  spec.law = MeasurementLaw::Gaussian;
  spec.mean_measurements = 10.0;
  spec.poisson_count = false;
  spec.runs = 1;
  spec.seed = 1;
  spec.plot_frames = {0};

  ModelConfig& m = spec.model;
  m.H = position_selector(4);
  m.R = Mat2::Identity();
  m.s = 1.0;
  set_cv_motion(m, spec.sample_time, 1.0, 0.01);
  m.gamma = 1.0;
  m.max_iterations = 10;

  spec.prior.kinematics = GaussianKinematics::make(
      Eigen::Vector4d(-20.0, -20.0, 0.0, 0.0), Eigen::Vector4d(300.0, 300.0, 1.0, 1.0).asDiagonal());
  spec.prior.orientation = {std::numbers::pi / 2.0, std::numbers::pi / 2.0};
  spec.prior.extent = {Vec2(101.0, 101.0), Vec2(600.0, 50.0)};

  spec.truth_start.position = Vec2::Zero();
  spec.truth_start.velocity = Vec2::Zero();
  spec.truth_start.orientation = 0.0;
  spec.truth_start.extent_diag = Vec2(6.0, 0.5);
  spec.truth_process_noise = false;
  return spec;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"cv-gaussian", "cv-uniform", "turns-uniform", "turns-gaussian", "single-update-oracle"};
}

ScenarioSpec make_preset(const std::string& name) {
  ScenarioSpec spec;
  if (name == "cv-gaussian") {
    spec = cv_scenario(MeasurementLaw::Gaussian);
  } else if (name == "cv-uniform") {
    spec = cv_scenario(MeasurementLaw::UniformEllipse);
  } else if (name == "turns-uniform") {
    spec = turn_scenario(MeasurementLaw::UniformEllipse);
  } else if (name == "turns-gaussian") {
    spec = turn_scenario(MeasurementLaw::Gaussian);
  } else if (name == "single-update-oracle") {
    spec = single_update_scenario();
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace ettvb

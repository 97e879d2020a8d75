#include "ettvb/serialization.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ettvb {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ConfigError(std::string(what) + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string(what) + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Vec2 vec2_from_json(const json& j, const char* what) {
  const Eigen::VectorXd v = vector_from_json(j, what);
  if (v.size() != 2) throw ConfigError(std::string(what) + " must have two entries");
  return v;
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

TrajectoryKind trajectory_from_string(const std::string& s) {
  if (s == "constant-velocity") return TrajectoryKind::ConstantVelocity;
  if (s == "waypoint-turn") return TrajectoryKind::WaypointTurn;
  if (s == "parked-replay") return TrajectoryKind::ParkedReplay;
  throw ConfigError("unknown trajectory kind '" + s + "'");
}

MeasurementLaw law_from_string(const std::string& s) {
  if (s == "gaussian") return MeasurementLaw::Gaussian;
  if (s == "uniform-ellipse") return MeasurementLaw::UniformEllipse;
  throw ConfigError("unknown measurement law '" + s + "'");
}

}  // namespace

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::ConstantVelocity: return "constant-velocity";
    case TrajectoryKind::WaypointTurn: return "waypoint-turn";
    case TrajectoryKind::ParkedReplay: return "parked-replay";
  }
  return "unknown";
}

const char* to_string(MeasurementLaw law) {
  switch (law) {
    case MeasurementLaw::Gaussian: return "gaussian";
    case MeasurementLaw::UniformEllipse: return "uniform-ellipse";
  }
  return "unknown";
}

void to_json(json& j, const TargetBelief& b) {
  j = json{{"kinematics", {{"mean", vector_to_json(b.kinematics.mean)},
                           {"cov", matrix_to_json(b.kinematics.covariance)}}},
           {"orientation", {{"mean", b.orientation.mean}, {"var", b.orientation.variance}}},
           {"extent", {{"alpha", vector_to_json(b.extent.shape)},
                       {"beta", vector_to_json(b.extent.scale)}}}};
}

void from_json(const json& j, TargetBelief& b) {
  try {
    const json& kin = require(j, "kinematics");
    b.kinematics = GaussianKinematics::make(vector_from_json(require(kin, "mean"), "kinematics.mean"),
                                            matrix_from_json(require(kin, "cov"), "kinematics.cov"));
    const json& ori = require(j, "orientation");
    b.orientation.mean = require(ori, "mean").get<double>();
    b.orientation.variance = require(ori, "var").get<double>();
    const json& ext = require(j, "extent");
    b.extent.shape = vec2_from_json(require(ext, "alpha"), "extent.alpha");
    b.extent.scale = vec2_from_json(require(ext, "beta"), "extent.beta");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed belief: ") + e.what());
  }
  b.validate();
}

void to_json(json& j, const ModelConfig& m) {
  j = json{{"H", matrix_to_json(m.H)},
           {"R", matrix_to_json(m.R)},
           {"s", m.s},
           {"F", matrix_to_json(m.F)},
           {"Q", matrix_to_json(m.Q)},
           {"gamma", m.gamma},
           {"max_iterations", m.max_iterations},
           {"early_stop_tolerance", m.early_stop_tolerance}};
}

void from_json(const json& j, ModelConfig& m) {
  try {
    m.H = matrix_from_json(require(j, "H"), "H");
    const Eigen::MatrixXd r = matrix_from_json(require(j, "R"), "R");
    if (r.rows() != 2 || r.cols() != 2) throw ConfigError("R must be 2x2");
    m.R = r;
    m.s = require(j, "s").get<double>();
    m.F = matrix_from_json(require(j, "F"), "F");
    m.Q = matrix_from_json(require(j, "Q"), "Q");
    m.gamma = require(j, "gamma").get<double>();
    m.max_iterations = require(j, "max_iterations").get<int>();
    m.early_stop_tolerance = j.value("early_stop_tolerance", 0.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  m.validate();
}

json scenario_to_json(const ScenarioSpec& spec) {
  json truth{{"position", vector_to_json(spec.truth_start.position)},
             {"velocity", vector_to_json(spec.truth_start.velocity)},
             {"orientation", spec.truth_start.orientation},
             {"extent", vector_to_json(spec.truth_start.extent_diag)},
             {"process_noise", spec.truth_process_noise}};
  if (!spec.truth_file.empty()) truth["file"] = spec.truth_file.string();

  return json{{"name", spec.name},
              {"trajectory", to_string(spec.trajectory)},
              {"steps", spec.steps},
              {"sample_time", spec.sample_time},
              {"measurement_law", to_string(spec.law)},
              {"mean_measurements", spec.mean_measurements},
              {"measurement_count", spec.poisson_count ? "poisson" : "fixed"},
              {"runs", spec.runs},
              {"seed", spec.seed},
              {"plot_frames", spec.plot_frames},
              {"model", spec.model},
              {"prior", spec.prior},
              {"truth", truth},
              {"turn", {{"speed", spec.turn.speed},
                        {"segment_duration", spec.turn.segment_duration},
                        {"arc_duration", spec.turn.arc_duration},
                        {"turn_angles_deg", spec.turn.turn_angles_deg},
                        {"initial_heading", spec.turn.initial_heading}}}};
}

ScenarioSpec scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  ScenarioSpec spec;
  try {
    spec.name = j.value("name", std::string("scenario"));
    spec.trajectory = trajectory_from_string(require(j, "trajectory").get<std::string>());
    spec.steps = require(j, "steps").get<int>();
    spec.sample_time = require(j, "sample_time").get<double>();
    spec.law = law_from_string(require(j, "measurement_law").get<std::string>());
    spec.mean_measurements = require(j, "mean_measurements").get<double>();
    const std::string count = j.value("measurement_count", std::string("poisson"));
    if (count != "poisson" && count != "fixed") {
      throw ConfigError("measurement_count must be 'poisson' or 'fixed'");
    }
    spec.poisson_count = count == "poisson";
    spec.runs = j.value("runs", 100);
    spec.seed = j.value("seed", std::uint64_t{1});
    spec.plot_frames = j.value("plot_frames", std::vector<int>{});
    spec.model = require(j, "model").get<ModelConfig>();
    spec.prior = require(j, "prior").get<TargetBelief>();

    const json& truth = require(j, "truth");
    spec.truth_start.position = vec2_from_json(require(truth, "position"), "truth.position");
    spec.truth_start.velocity =
        truth.contains("velocity") ? vec2_from_json(truth.at("velocity"), "truth.velocity") : Vec2::Zero();
    spec.truth_start.orientation = truth.value("orientation", 0.0);
    spec.truth_start.extent_diag = vec2_from_json(require(truth, "extent"), "truth.extent");
    spec.truth_process_noise = truth.value("process_noise", true);
    if (truth.contains("file")) {
      std::filesystem::path file = truth.at("file").get<std::string>();
      spec.truth_file = file.is_relative() && !base_dir.empty() ? base_dir / file : file;
    }

    if (j.contains("turn")) {
      const json& t = j.at("turn");
      spec.turn.speed = t.value("speed", spec.turn.speed);
      spec.turn.segment_duration = t.value("segment_duration", spec.turn.segment_duration);
      spec.turn.arc_duration = t.value("arc_duration", spec.turn.arc_duration);
      spec.turn.turn_angles_deg = t.value("turn_angles_deg", spec.turn.turn_angles_deg);
      spec.turn.initial_heading = t.value("initial_heading", spec.turn.initial_heading);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  spec.validate();
  return spec;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(parse_json_text(buf.str(), path.string()), path.parent_path());
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << scenario_to_json(spec).dump(2) << '\n';
}

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

}  // namespace ettvb

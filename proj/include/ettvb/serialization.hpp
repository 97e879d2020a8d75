#pragma once

#include <filesystem>

#include <json.hpp>

#include "ettvb/core_state.hpp"
#include "ettvb/simulator.hpp"

namespace ettvb {

// Belief layout: {"kinematics": {"mean", "cov"}, "orientation": {"mean", "var"},
//                 "extent": {"alpha", "beta"}}
void to_json(nlohmann::json& j, const TargetBelief& b);
void from_json(const nlohmann::json& j, TargetBelief& b);

// Model layout: {"H", "R", "s", "F", "Q", "gamma", "max_iterations", "early_stop_tolerance"}
void to_json(nlohmann::json& j, const ModelConfig& m);
void from_json(const nlohmann::json& j, ModelConfig& m);

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
/// Relative truth_file paths are resolved against base_dir. Throws ConfigError.
ScenarioSpec scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

ScenarioSpec load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

/// Parses JSON text, mapping parse failures to ConfigError.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/// Rounds to `digits` significant decimal digits (used for stable output files).
double round_significant(double value, int digits = 9);

const char* to_string(TrajectoryKind kind);
const char* to_string(MeasurementLaw law);

}  // namespace ettvb

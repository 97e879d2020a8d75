#pragma once

#include <string>
#include <vector>

#include "ettvb/simulator.hpp"

namespace ettvb {

/// Nearly-constant-velocity model on [px, py, vx, vy] with a random-walk
/// orientation: F = blkdiag([1 T; 0 1] (x) I2, 1), Q = blkdiag(sigma^2 [T^3/3 T^2/2; T^2/2 T] (x) I2, q_theta).
/// q_theta is a variance.
void set_cv_motion(ModelConfig& model, double sample_time, double sigma, double q_theta);

/// Position-selecting measurement matrix [I2 0] for an n_x-dimensional state.
Eigen::MatrixXd position_selector(Eigen::Index n_x);

/// Names accepted by make_preset.
std::vector<std::string> preset_names();

/// Built-in scenario by name; throws ConfigError for an unknown name.
ScenarioSpec make_preset(const std::string& name);

}  // namespace ettvb

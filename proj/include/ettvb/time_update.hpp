#pragma once

#include "ettvb/core_state.hpp"

namespace ettvb {

/// Smallest inverse-Gamma shape kept after forgetting so the extent mean stays defined.
inline constexpr double kMinExtentShape = 1.0 + 1e-6;

/// Kalman prediction of the augmented state [x; theta] with (F, Q), followed by
/// the forgetting-factor prediction alpha <- gamma alpha, beta <- gamma beta.
/// Any cross-covariance between kinematics and orientation created by F or Q is
/// dropped, since the belief keeps them as separate factors.
TargetBelief time_update(const TargetBelief& posterior, const ModelConfig& cfg);

}  // namespace ettvb

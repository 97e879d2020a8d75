#pragma once

#include "ettvb/core_state.hpp"

namespace ettvb {

/// Counter-clockwise 2-D rotation by `theta` radians. Throws std::domain_error
/// for non-finite angles.
Mat2 rotation(double theta);

/// Entrywise derivative of rotation() with respect to the angle.
Mat2 rotation_derivative(double theta);

struct TrigMoments {
  double cos2;  // E[cos 2theta]
  double sin2;  // E[sin 2theta]
};

/// Moments of the doubled angle under theta ~ N(mean, variance).
TrigMoments trig_moments(double mean, double variance);

/// E[T M_inv T^T] for T = rotation(theta), theta ~ N(mean, variance).
///
/// M_inv may be any 2x2 matrix. Each entry is a linear combination of
/// (1 + E cos2θ, 1 - E cos2θ, E sin2θ) with half weights, so a zero variance
/// reproduces the deterministic rotation exactly. Since (T M T^T)^-1 = T M^-1 T^T,
/// passing M^-1 yields the expected inverse of the rotated matrix.
Mat2 expected_rotated_inverse(const Mat2& m_inv, double mean, double variance);

/// Diagonal special case of expected_rotated_inverse:
///   (1 - e^{-2v}) tr(D)/2 I + e^{-2v} T(mean) D T(mean)^T
Mat2 expected_rotated_inverse_diag(const Vec2& diag_inv, double mean, double variance);

}  // namespace ettvb

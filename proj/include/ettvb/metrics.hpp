#pragma once

#include <span>

#include "ettvb/core_state.hpp"

namespace ettvb {

/// Squared Gaussian Wasserstein distance split into its center and extent parts.
struct GwBreakdown {
  double center_term = 0.0;  // ||m_a - m_b||^2
  double extent_term = 0.0;  // tr[X_a + X_b - 2 (X_a^1/2 X_b X_a^1/2)^1/2]
  double distance = 0.0;     // sqrt(center_term + extent_term)
};

/// Symmetric PSD square root of a symmetric PSD 2x2 matrix, closed form
/// (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)). Eigenvalues slightly below
/// zero (down to -1e-10 relative to the trace) are clamped; anything more
/// negative throws std::domain_error.
Mat2 psd_sqrt_2x2(const Mat2& a);

GwBreakdown gw_distance(const Vec2& m_a, const Mat2& x_a, const Vec2& m_b, const Mat2& x_b);

enum class HeadingWrap {
  Axial,  // errors wrapped to (-pi/2, pi/2]; an ellipse at theta and theta + pi is the same
  None,   // raw differences
};

/// Wraps an angle difference to (-pi/2, pi/2].
double wrap_axial(double angle);

/// Root-mean-square heading error in degrees.
double heading_rmse(std::span<const double> truth, std::span<const double> estimate,
                    HeadingWrap wrap = HeadingWrap::Axial);

}  // namespace ettvb

#include "ettvb/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace ettvb {

namespace {

void require_finite_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("rotation angle must be finite");
  }
}

void require_variance(double variance) {
  if (!(variance >= 0.0)) {
    throw std::domain_error("orientation variance must be nonnegative");
  }
}

}  // namespace

Mat2 rotation(double theta) {
  require_finite_angle(theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 t;
  t << c, -s, s, c;
  return t;
}

Mat2 rotation_derivative(double theta) {
  require_finite_angle(theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 d;
  d << -s, -c, c, -s;
  return d;
}

TrigMoments trig_moments(double mean, double variance) {
  require_finite_angle(mean);
  require_variance(variance);
  const double attenuation = std::exp(-2.0 * variance);
  return {std::cos(2.0 * mean) * attenuation, std::sin(2.0 * mean) * attenuation};
}

Mat2 expected_rotated_inverse(const Mat2& m_inv, double mean, double variance) {
  const TrigMoments tm = trig_moments(mean, variance);
  const Eigen::Vector3d kernel(1.0 + tm.cos2, 1.0 - tm.cos2, tm.sin2);

  const double m11 = m_inv(0, 0);
  const double m12 = m_inv(0, 1);
  const double m21 = m_inv(1, 0);
  const double m22 = m_inv(1, 1);

  Mat2 out;
  out(0, 0) = 0.5 * Eigen::Vector3d(m11, m22, -(m12 + m21)).dot(kernel);
  out(0, 1) = 0.5 * Eigen::Vector3d(m12, -m21, m11 - m22).dot(kernel);
  out(1, 0) = 0.5 * Eigen::Vector3d(m21, -m12, m11 - m22).dot(kernel);
  out(1, 1) = 0.5 * Eigen::Vector3d(m22, m11, m12 + m21).dot(kernel);
  return out;
}

Mat2 expected_rotated_inverse_diag(const Vec2& diag_inv, double mean, double variance) {
  require_finite_angle(mean);
  require_variance(variance);
  const double attenuation = std::exp(-2.0 * variance);
  const Mat2 t = rotation(mean);
  const Mat2 rotated = t * diag_inv.asDiagonal() * t.transpose();
  return (1.0 - attenuation) * 0.5 * diag_inv.sum() * Mat2::Identity() + attenuation * rotated;
}

}  // namespace ettvb

#include "ettvb/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ettvb {

namespace {

constexpr double kNegativeEigenTolerance = 1e-10;

double min_eigenvalue(const Mat2& a) {
  const double half_trace = 0.5 * a.trace();
  const double disc = half_trace * half_trace - a.determinant();
  return half_trace - std::sqrt(std::max(disc, 0.0));
}

void require_symmetric_psd(const Mat2& a, const char* what) {
  if (!a.allFinite()) {
    throw std::domain_error(std::string(what) + " has non-finite entries");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (std::abs(a(0, 1) - a(1, 0)) > 1e-9 * scale) {
    throw std::domain_error(std::string(what) + " is not symmetric");
  }
  if (min_eigenvalue(a) < -kNegativeEigenTolerance * std::max(1.0, std::abs(a.trace()))) {
    throw std::domain_error(std::string(what) + " is not positive semi-definite");
  }
}

// Square root of an already-validated symmetric PSD matrix.
Mat2 clamped_sqrt(const Mat2& a_in) {
  Mat2 a = 0.5 * (a_in + a_in.transpose());
  double det = a.determinant();
  if (det < 0.0 || min_eigenvalue(a) < 0.0) {
    // Tiny negative eigenvalue from rounding: clamp it and rebuild.
    Eigen::SelfAdjointEigenSolver<Mat2> eig;
    eig.computeDirect(a);
    const Vec2 lambda = eig.eigenvalues().cwiseMax(0.0);
    a = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    det = lambda(0) * lambda(1);
  }
  const double root_det = std::sqrt(std::max(det, 0.0));
  const double norm = std::sqrt(std::max(a.trace() + 2.0 * root_det, 0.0));
  if (norm == 0.0) {
    return Mat2::Zero();
  }
  return (a + root_det * Mat2::Identity()) / norm;
}

}  // namespace

Mat2 psd_sqrt_2x2(const Mat2& a) {
  require_symmetric_psd(a, "psd_sqrt_2x2 input");
  return clamped_sqrt(a);
}

GwBreakdown gw_distance(const Vec2& m_a, const Mat2& x_a, const Vec2& m_b, const Mat2& x_b) {
  require_symmetric_psd(x_a, "first extent");
  require_symmetric_psd(x_b, "second extent");

  GwBreakdown out;
  out.center_term = (m_a - m_b).squaredNorm();

  const Mat2 root_a = clamped_sqrt(x_a);
  const Mat2 cross = root_a * x_b * root_a;
  const double cross_trace = clamped_sqrt(cross).trace();
  out.extent_term = std::max(0.0, x_a.trace() + x_b.trace() - 2.0 * cross_trace);
  out.distance = std::sqrt(out.center_term + out.extent_term);
  return out;
}

double wrap_axial(double angle) {
  constexpr double pi = std::numbers::pi;
  return angle - pi * std::ceil((angle - 0.5 * pi) / pi);
}

double heading_rmse(std::span<const double> truth, std::span<const double> estimate,
                    HeadingWrap wrap) {
  if (truth.size() != estimate.size()) {
    throw std::invalid_argument("heading_rmse: truth and estimate lengths differ");
  }
  if (truth.empty()) {
    throw std::invalid_argument("heading_rmse: need at least one step");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    double e = truth[k] - estimate[k];
    if (wrap == HeadingWrap::Axial) e = wrap_axial(e);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(truth.size())) * 180.0 / std::numbers::pi;
}

}  // namespace ettvb

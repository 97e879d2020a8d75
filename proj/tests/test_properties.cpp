// Randomized invariants of the measurement and time updates.

#include <gtest/gtest.h>

#include <algorithm>

#include "ettvb/measurement_update.hpp"
#include "ettvb/time_update.hpp"
#include "test_support.hpp"

using namespace ettvb;
using ettvb::testing::Rng;
using ettvb::testing::uniform;

namespace {

// Prior whose covariance is isotropic within the position and velocity blocks,
// so rotating the scene maps the prior onto a rotated copy of itself.
TargetBelief isotropic_belief(Rng& rng) {
  TargetBelief b = ettvb::testing::random_belief(rng);
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p.topLeftCorner<2, 2>() = uniform(rng, 0.5, 20.0) * Mat2::Identity();
  p.bottomRightCorner<2, 2>() = uniform(rng, 0.5, 5.0) * Mat2::Identity();
  const double c = uniform(rng, -0.2, 0.2) * std::sqrt(p(0, 0) * p(2, 2));
  p(0, 2) = p(2, 0) = p(1, 3) = p(3, 1) = c;
  b.kinematics = GaussianKinematics::make(b.kinematics.mean, p);
  return b;
}

Eigen::Matrix4d block_rotation(double phi) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  t.topLeftCorner<2, 2>() = ettvb::testing::rot(phi);
  t.bottomRightCorner<2, 2>() = ettvb::testing::rot(phi);
  return t;
}

}  // namespace

TEST(Properties, MeasurementOrderDoesNotMatter) {
  Rng rng(1);
  const ModelConfig cfg = ettvb::testing::cv_config();
  for (int i = 0; i < 50; ++i) {
    const TargetBelief prior = ettvb::testing::random_belief(rng);
    MeasurementBatch batch = ettvb::testing::random_batch(rng, prior.kinematics.mean.head<2>(), 12);
    const TargetBelief a = measurement_update(prior, batch, cfg);
    std::shuffle(batch.points.begin(), batch.points.end(), rng);
    const TargetBelief b = measurement_update(prior, batch, cfg);
    EXPECT_EQ(a.kinematics.mean, b.kinematics.mean);
    EXPECT_EQ(a.kinematics.covariance, b.kinematics.covariance);
    EXPECT_EQ(a.orientation.mean, b.orientation.mean);
    EXPECT_EQ(a.orientation.variance, b.orientation.variance);
    EXPECT_EQ(a.extent.shape, b.extent.shape);
    EXPECT_EQ(a.extent.scale, b.extent.scale);
  }
}

TEST(Properties, TranslationEquivariance) {
  Rng rng(2);
  const ModelConfig cfg = ettvb::testing::cv_config(0.5, 2.0);
  for (int i = 0; i < 50; ++i) {
    const TargetBelief prior = ettvb::testing::random_belief(rng);
    const MeasurementBatch batch = ettvb::testing::random_batch(rng, prior.kinematics.mean.head<2>(), 8);
    const Vec2 d(uniform(rng, -100, 100), uniform(rng, -100, 100));

    TargetBelief shifted_prior = prior;
    shifted_prior.kinematics.mean.head<2>() += d;
    MeasurementBatch shifted = batch;
    for (Vec2& y : shifted.points) y += d;

    const TargetBelief a = measurement_update(prior, batch, cfg);
    const TargetBelief b = measurement_update(shifted_prior, shifted, cfg);
    Eigen::VectorXd expected = a.kinematics.mean;
    expected.head<2>() += d;
    EXPECT_LT((b.kinematics.mean - expected).cwiseAbs().maxCoeff(), 1e-9 * (1 + d.norm()));
    EXPECT_LT(ettvb::testing::rel_err(b.kinematics.covariance, a.kinematics.covariance), 1e-9);
    EXPECT_NEAR(b.orientation.mean, a.orientation.mean, 1e-9);
    EXPECT_NEAR(b.orientation.variance, a.orientation.variance, 1e-9 * a.orientation.variance);
    EXPECT_LT(ettvb::testing::rel_err(b.extent.scale, a.extent.scale), 1e-9);
  }
}

TEST(Properties, RotationEquivariance) {
  Rng rng(3);
  const ModelConfig cfg = ettvb::testing::cv_config(1.0, 1.5);
  for (int i = 0; i < 50; ++i) {
    const TargetBelief prior = isotropic_belief(rng);
    const MeasurementBatch batch = ettvb::testing::random_batch(rng, prior.kinematics.mean.head<2>(), 10);
    const double phi = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const Mat2 r = ettvb::testing::rot(phi);
    const Eigen::Matrix4d big = block_rotation(phi);

    TargetBelief rotated_prior = prior;
    rotated_prior.kinematics =
        GaussianKinematics::make(big * prior.kinematics.mean, big * prior.kinematics.covariance * big.transpose());
    rotated_prior.orientation.mean += phi;
    MeasurementBatch rotated = batch;
    for (Vec2& y : rotated.points) y = r * y;

    const TargetBelief a = measurement_update(prior, batch, cfg);
    const TargetBelief b = measurement_update(rotated_prior, rotated, cfg);
    const Eigen::VectorXd expected_mean = big * a.kinematics.mean;
    const Eigen::MatrixXd expected_cov = big * a.kinematics.covariance * big.transpose();
    EXPECT_LT(ettvb::testing::rel_err(b.kinematics.mean, expected_mean), 1e-6);
    EXPECT_LT(ettvb::testing::rel_err(b.kinematics.covariance, expected_cov), 1e-6);
    EXPECT_NEAR(b.orientation.mean, a.orientation.mean + phi, 1e-6);
    EXPECT_NEAR(b.orientation.variance, a.orientation.variance, 1e-6 * (1 + a.orientation.variance));
    EXPECT_LT(ettvb::testing::rel_err(b.extent.scale, a.extent.scale), 1e-9);
    EXPECT_EQ(b.extent.shape, a.extent.shape);
  }
}

TEST(Properties, ShapeGrowsByHalfTheMeasurementCount) {
  Rng rng(4);
  const ModelConfig cfg = ettvb::testing::cv_config();
  for (int i = 0; i < 100; ++i) {
    const TargetBelief prior = ettvb::testing::random_belief(rng);
    const int m = static_cast<int>(uniform(rng, 1, 30));
    const MeasurementBatch batch = ettvb::testing::random_batch(rng, prior.kinematics.mean.head<2>(), m);
    const TargetBelief post = measurement_update(prior, batch, cfg);
    EXPECT_DOUBLE_EQ(post.extent.shape(0), prior.extent.shape(0) + 0.5 * m);
    EXPECT_DOUBLE_EQ(post.extent.shape(1), prior.extent.shape(1) + 0.5 * m);
  }
}

TEST(Properties, UpdateNeverInflatesUncertainty) {
  Rng rng(5);
  const ModelConfig cfg = ettvb::testing::cv_config(0.8, 3.0);
  for (int i = 0; i < 200; ++i) {
    const TargetBelief prior = ettvb::testing::random_belief(rng);
    const MeasurementBatch batch = ettvb::testing::random_batch(
        rng, prior.kinematics.mean.head<2>(), static_cast<int>(uniform(rng, 1, 25)), uniform(rng, 1, 30));
    const TargetBelief post = measurement_update(prior, batch, cfg);
    EXPECT_LE(post.orientation.variance, prior.orientation.variance * (1 + 1e-12));
    EXPECT_TRUE(ettvb::testing::is_psd(prior.kinematics.covariance - post.kinematics.covariance,
                                       1e-9 * prior.kinematics.covariance.norm()));
  }
}

TEST(Properties, FilterStaysWellPosedOverLongRandomSequences) {
  Rng rng(6);
  ModelConfig cfg = ettvb::testing::cv_config(0.6, 2.0);
  TargetBelief belief = ettvb::testing::random_belief(rng);
  Vec2 center = belief.kinematics.mean.head<2>();
  for (int k = 0; k < 1000; ++k) {
    belief = time_update(belief, cfg);
    center += Vec2(uniform(rng, -1, 1), uniform(rng, -1, 1));
    const int m = static_cast<int>(uniform(rng, 0, 15));
    const MeasurementBatch batch = ettvb::testing::random_batch(rng, center, m, uniform(rng, 0.5, 20));
    belief = measurement_update(belief, batch, cfg);

    ASSERT_NO_THROW(belief.validate()) << "step " << k;
    ASSERT_TRUE(ettvb::testing::is_psd(belief.kinematics.covariance)) << "step " << k;
    ASSERT_GT(belief.orientation.variance, 0.0) << "step " << k;
    ASSERT_GT(belief.extent.shape.minCoeff(), 1.0) << "step " << k;
    ASSERT_GT(belief.extent.scale.minCoeff(), 0.0) << "step " << k;
  }
}

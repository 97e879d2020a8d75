#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "ettvb/core_state.hpp"
#include "ettvb/serialization.hpp"
#include "test_support.hpp"

using namespace ettvb;
using ettvb::testing::Rng;
using ettvb::testing::uniform;

namespace {

TargetBelief belief_with(double theta, const Vec2& alpha, const Vec2& beta) {
  TargetBelief b;
  b.kinematics = GaussianKinematics::make(Eigen::Vector4d::Zero(), Eigen::Matrix4d::Identity());
  b.orientation = {theta, 0.1};
  b.extent = {alpha, beta};
  return b;
}

}  // namespace

TEST(ExtentMean, UnitShapeOffset) {
  const Mat2 m = extent_mean({Vec2(2, 2), Vec2(100, 100)});
  EXPECT_DOUBLE_EQ(m(0, 0), 100.0);
  EXPECT_DOUBLE_EQ(m(1, 1), 100.0);
  EXPECT_DOUBLE_EQ(m(0, 1), 0.0);
}

TEST(ExtentMean, SingleUpdatePrior) {
  const Mat2 m = extent_mean({Vec2(101, 101), Vec2(600, 50)});
  EXPECT_DOUBLE_EQ(m(0, 0), 6.0);
  EXPECT_DOUBLE_EQ(m(1, 1), 0.5);
}

TEST(ExtentMean, TurnScenarioPrior) {
  const Mat2 m = extent_mean({Vec2(5, 5), Vec2(400.0 * 400.0, 180.0 * 180.0)});
  EXPECT_DOUBLE_EQ(m(0, 0), 40000.0);
  EXPECT_DOUBLE_EQ(m(1, 1), 8100.0);
}

TEST(ExtentMean, UndefinedForShapeAtMostOne) {
  try {
    (void)extent_mean({Vec2(1.0, 3.0), Vec2(1.0, 1.0)});
    FAIL() << "expected a domain error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("extent mean undefined"), std::string::npos);
  }
  EXPECT_THROW((void)extent_mean({Vec2(3.0, 0.5), Vec2(1.0, 1.0)}), std::domain_error);
}

TEST(ExtentMean, MonotoneInShapeAndScale) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec2 alpha(uniform(rng, 1.1, 50), uniform(rng, 1.1, 50));
    const Vec2 beta(uniform(rng, 0.1, 500), uniform(rng, 0.1, 500));
    const Mat2 base = extent_mean({alpha, beta});
    const Mat2 more_alpha = extent_mean({alpha + Vec2(0.5, 0.5), beta});
    const Mat2 more_beta = extent_mean({alpha, beta + Vec2(0.5, 0.5)});
    for (int k = 0; k < 2; ++k) {
      EXPECT_LT(more_alpha(k, k), base(k, k));
      EXPECT_GT(more_beta(k, k), base(k, k));
    }
  }
}

TEST(EstimatedExtent, IdentityRotation) {
  const Mat2 x = estimated_extent_matrix(belief_with(0.0, Vec2(2, 2), Vec2(50, 600)));
  EXPECT_NEAR(x(0, 0), 50.0, 1e-12);
  EXPECT_NEAR(x(1, 1), 600.0, 1e-12);
  EXPECT_NEAR(x(0, 1), 0.0, 1e-12);
}

TEST(EstimatedExtent, QuarterTurnSwapsAxes) {
  const Mat2 x = estimated_extent_matrix(belief_with(std::numbers::pi / 2, Vec2(2, 2), Vec2(50, 600)));
  EXPECT_NEAR(x(0, 0), 600.0, 1e-10);
  EXPECT_NEAR(x(1, 1), 50.0, 1e-10);
  EXPECT_NEAR(x(0, 1), 0.0, 1e-10);
}

TEST(EstimatedExtent, RankOneAtFortyFiveDegrees) {
  // beta ~ 0 with alpha = 2 gives a mean of (2, ~0).
  const Mat2 x = estimated_extent_matrix(belief_with(std::numbers::pi / 4, Vec2(2, 2), Vec2(2, 1e-300)));
  EXPECT_NEAR(x(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(x(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(x(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(x(1, 1), 1.0, 1e-12);
}

TEST(EstimatedExtent, HalfTurnInvariantAndEigenvaluesMatch) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double theta = uniform(rng, -10, 10);
    const Vec2 alpha(uniform(rng, 1.5, 10), uniform(rng, 1.5, 10));
    const Vec2 beta(uniform(rng, 1, 100), uniform(rng, 1, 100));
    const Mat2 a = estimated_extent_matrix(belief_with(theta, alpha, beta));
    const Mat2 b = estimated_extent_matrix(belief_with(theta + std::numbers::pi, alpha, beta));
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    EXPECT_DOUBLE_EQ(a(0, 1), a(1, 0));

    Eigen::SelfAdjointEigenSolver<Mat2> es(a);
    Vec2 expected = extent_mean({alpha, beta}).diagonal();
    std::sort(expected.data(), expected.data() + 2);
    EXPECT_NEAR(es.eigenvalues()(0), expected(0), 1e-9 * expected(1));
    EXPECT_NEAR(es.eigenvalues()(1), expected(1), 1e-9 * expected(1));
  }
}

TEST(GaussianKinematics, SymmetrizesBeforeValidation) {
  Eigen::Matrix2d p;
  p << 2.0, 1.0 + 1e-13, 1.0, 2.0;
  const auto g = GaussianKinematics::make(Eigen::Vector2d(1, 2), p);
  EXPECT_EQ(g.covariance(0, 1), g.covariance(1, 0));
}

TEST(GaussianKinematics, RejectsIndefiniteAndAsymmetric) {
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(GaussianKinematics::make(Eigen::Vector2d::Zero(), bad), ConfigError);

  GaussianKinematics asym{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()};
  asym.covariance(0, 1) = 0.5;
  EXPECT_THROW(asym.validate(), ConfigError);

  GaussianKinematics wrong_size{Eigen::Vector3d::Zero(), Eigen::Matrix2d::Identity()};
  EXPECT_THROW(wrong_size.validate(), ConfigError);
}

TEST(BeliefValidation, OrientationAndExtentInvariants) {
  EXPECT_THROW((OrientationBelief{0.0, -1e-3}.validate()), ConfigError);
  EXPECT_NO_THROW((OrientationBelief{0.0, 0.0}.validate()));
  EXPECT_THROW((ExtentBelief{Vec2(1.0, 2.0), Vec2(1, 1)}.validate()), ConfigError);
  EXPECT_THROW((ExtentBelief{Vec2(2.0, 2.0), Vec2(0.0, 1)}.validate()), ConfigError);
  EXPECT_THROW((OrientationBelief{std::numeric_limits<double>::quiet_NaN(), 1.0}.validate()), ConfigError);
}

TEST(ModelConfig, RejectsInvalidParameters) {
  const ModelConfig good = ettvb::testing::cv_config();
  EXPECT_NO_THROW(good.validate_for(4));

  ModelConfig c = good;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = good;
  c.gamma = 1.01;
  EXPECT_THROW(c.validate(), ConfigError);
  c = good;
  c.s = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = good;
  c.R << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = good;
  c.Q(0, 0) = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = good;
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(good.validate_for(6), ConfigError);
}

TEST(MeasurementBatch, RejectsNonFinitePoints) {
  MeasurementBatch b;
  b.points = {Vec2(1, 2), Vec2(std::numeric_limits<double>::infinity(), 0)};
  EXPECT_THROW(b.validate(), std::invalid_argument);
  EXPECT_NO_THROW(MeasurementBatch{}.validate());
}

TEST(Inverse2x2, MatchesEigenAndRejectsSingular) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Mat2 a = ettvb::testing::random_matrix2(rng) + 4.0 * Mat2::Identity();
    EXPECT_LT(ettvb::testing::rel_err(inverse_2x2(a), a.fullPivLu().inverse()), 1e-12);
  }
  Mat2 singular;
  singular << 1.0, 2.0, 2.0, 4.0;
  EXPECT_THROW((void)inverse_2x2(singular, "test"), NumericError);
}

TEST(Serialization, BeliefUsesDocumentedFieldNames) {
  const TargetBelief b = belief_with(0.3, Vec2(3, 4), Vec2(10, 20));
  const nlohmann::json j = b;
  EXPECT_TRUE(j.at("kinematics").contains("mean"));
  EXPECT_TRUE(j.at("kinematics").contains("cov"));
  EXPECT_DOUBLE_EQ(j.at("orientation").at("mean").get<double>(), 0.3);
  EXPECT_DOUBLE_EQ(j.at("orientation").at("var").get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(j.at("extent").at("alpha")[1].get<double>(), 4.0);
  EXPECT_DOUBLE_EQ(j.at("extent").at("beta")[0].get<double>(), 10.0);

  const TargetBelief back = nlohmann::json::parse(j.dump()).get<TargetBelief>();
  EXPECT_EQ(back.kinematics.mean, b.kinematics.mean);
  EXPECT_EQ(back.kinematics.covariance, b.kinematics.covariance);
  EXPECT_EQ(back.orientation.mean, b.orientation.mean);
  EXPECT_EQ(back.extent.shape, b.extent.shape);
  EXPECT_EQ(back.extent.scale, b.extent.scale);
}

TEST(Serialization, ModelRoundTripsExactly) {
  ModelConfig cfg = ettvb::testing::cv_config(0.25, 5.0);
  cfg.early_stop_tolerance = 1e-8;
  const ModelConfig back = nlohmann::json::parse(nlohmann::json(cfg).dump()).get<ModelConfig>();
  EXPECT_EQ(back.H, cfg.H);
  EXPECT_EQ(back.R, cfg.R);
  EXPECT_EQ(back.F, cfg.F);
  EXPECT_EQ(back.Q, cfg.Q);
  EXPECT_EQ(back.s, cfg.s);
  EXPECT_EQ(back.gamma, cfg.gamma);
  EXPECT_EQ(back.max_iterations, cfg.max_iterations);
  EXPECT_EQ(back.early_stop_tolerance, cfg.early_stop_tolerance);
}

TEST(Serialization, MalformedInputIsConfigError) {
  EXPECT_THROW(parse_json_text("{ not json", "inline"), ConfigError);
  nlohmann::json j = belief_with(0.0, Vec2(2, 2), Vec2(1, 1));
  j["extent"].erase("beta");
  EXPECT_THROW((void)j.get<TargetBelief>(), ConfigError);
  j = belief_with(0.0, Vec2(2, 2), Vec2(1, 1));
  j["kinematics"]["cov"] = "identity";
  EXPECT_THROW((void)j.get<TargetBelief>(), ConfigError);
}

TEST(Serialization, RoundSignificant) {
  EXPECT_EQ(round_significant(1.23456789012345, 9), 1.23456789);
  EXPECT_EQ(round_significant(-98765.4321987654, 9), -98765.4322);
  EXPECT_EQ(round_significant(0.0), 0.0);
}

#include <gtest/gtest.h>

#include "polycert/numerics.hpp"
#include "polycert/smoothing.hpp"

using namespace polycert;
using namespace polycert::smoothing;

namespace {

BaseClassifier halfspace(double offset = 0.0) {
  return [offset](const Vec& x) { return x[0] > offset ? 1 : 0; };
}

Vec point(Eigen::Index n, double first) {
  Vec x = Vec::Zero(n);
  x[0] = first;
  return x;
}

}  // namespace

TEST(Smoothing, AllAgreeRadius) {
  SmoothingConfig cfg;
  EXPECT_NEAR(all_agree_radius(cfg), 0.0300095004824127301, 1e-12);
  cfg.sigma = 0.04;
  EXPECT_NEAR(all_agree_radius(cfg), 2 * 0.0300095004824127301, 1e-12);
}

TEST(Smoothing, ConstantBaseCertifiesTheAllAgreeRadius) {
  SmoothingConfig cfg;
  const auto c = smooth_certify([](const Vec&) { return 2; }, Vec::Zero(5), cfg);
  EXPECT_EQ(c.predicted, 2);
  EXPECT_EQ(c.count, cfg.n);
  EXPECT_NEAR(c.p_lower, numerics::clopper_pearson_lower(cfg.n, cfg.n, cfg.confidence), 1e-15);
  EXPECT_NEAR(c.radius, all_agree_radius(cfg), 1e-15);
}

TEST(Smoothing, VanishingNoiseFollowsTheBase) {
  SmoothingConfig cfg;
  cfg.sigma = 1e-9;
  const auto c = smooth_certify(halfspace(), point(4, 0.1), cfg);
  EXPECT_EQ(c.predicted, 1);
  EXPECT_EQ(c.count, cfg.n);
  EXPECT_EQ(smooth_predict(halfspace(), point(4, -0.1), cfg), 0);
}

TEST(Smoothing, HalfspaceAtTwoSigma) {
  int right = 0, sound = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SmoothingConfig cfg;
    cfg.seed = seed;
    const auto c = smooth_certify(halfspace(), point(10, 2 * cfg.sigma), cfg);
    right += c.predicted == 1;
    // The true margin of the smoothed classifier is sigma * Phi^{-1}(Phi(2)) = 2 sigma.
    sound += c.radius <= 2 * cfg.sigma;
  }
  EXPECT_GE(right, 95);
  EXPECT_GE(sound, 99);
}

TEST(Smoothing, AbstainsOnTheBoundary) {
  SmoothingConfig cfg;
  const auto c = smooth_certify(halfspace(), point(3, 0.0), cfg);
  EXPECT_EQ(c.predicted, kAbstain);
  EXPECT_EQ(c.radius, 0.0);
  EXPECT_EQ(smooth_predict([](const Vec&) { return kAbstain; }, point(3, 0.0), cfg), kAbstain);
}

TEST(Smoothing, Deterministic) {
  SmoothingConfig cfg;
  cfg.seed = 42;
  const auto a = smooth_certify(halfspace(), point(3, 0.01), cfg);
  const auto b = smooth_certify(halfspace(), point(3, 0.01), cfg);
  EXPECT_EQ(a.predicted, b.predicted);
  EXPECT_EQ(a.count, b.count);
  EXPECT_EQ(a.radius, b.radius);
}

TEST(Smoothing, ConfigValidation) {
  SmoothingConfig cfg;
  cfg.sigma = 0.0;
  EXPECT_THROW(smooth_certify(halfspace(), point(2, 0.0), cfg), ArgumentError);
  cfg.sigma = 0.1;
  cfg.n = 0;
  EXPECT_THROW(smooth_certify(halfspace(), point(2, 0.0), cfg), ArgumentError);
  EXPECT_THROW(numerics::ConfidenceLevel(1.0), ArgumentError);
}

TEST(Curve, HandExample) {
  std::vector<SmoothingCertificate> certs(4);
  certs[0] = {0, 0.9, 0.5, 90};
  certs[1] = {1, 0.8, 0.2, 80};
  certs[2] = {0, 0.7, 0.3, 70};  // wrong
  certs[3] = {kAbstain, 0.0, 0.0, 0};
  const auto curve = accuracy_curve(certs, {0, 1, 1, 1}, {0.0, 0.2, 0.4, 0.6});
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_DOUBLE_EQ(curve[0].certified_accuracy, 0.5);
  EXPECT_DOUBLE_EQ(curve[1].certified_accuracy, 0.5);
  EXPECT_DOUBLE_EQ(curve[2].certified_accuracy, 0.25);
  EXPECT_DOUBLE_EQ(curve[3].certified_accuracy, 0.0);
}

TEST(Curve, ConstantBaseOnBalancedData) {
  data::LabeledDataset ds;
  ds.dim = 3;
  ds.num_classes = 2;
  for (int i = 0; i < 20; ++i) {
    ds.points.push_back(Vec::Constant(3, 0.1 * i));
    ds.labels.push_back(i % 2);
  }
  SmoothingConfig cfg;
  const auto curve = certified_accuracy_curve([](const Vec&) { return 0; }, ds, cfg, {0.0, 0.01, 0.03, 0.031});
  EXPECT_DOUBLE_EQ(curve[0].certified_accuracy, 0.5);
  EXPECT_DOUBLE_EQ(curve[2].certified_accuracy, 0.5);
  EXPECT_DOUBLE_EQ(curve[3].certified_accuracy, 0.0);
}

TEST(Curve, NonincreasingInRadius) {
  data::LabeledDataset ds;
  ds.dim = 4;
  ds.num_classes = 2;
  numerics::Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    ds.points.push_back(rng.gaussian(4, 0.05));
    ds.labels.push_back(ds.points.back()[0] > 0 ? 1 : 0);
  }
  SmoothingConfig cfg;
  std::vector<double> radii;
  for (int i = 0; i <= 20; ++i) radii.push_back(0.005 * i);
  const auto curve = certified_accuracy_curve(halfspace(), ds, cfg, radii);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].certified_accuracy, curve[i - 1].certified_accuracy);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polycert/analytic.hpp"
#include "polycert/numerics.hpp"

using namespace polycert;
using namespace polycert::analytic;

constexpr double kHalfPi = std::numbers::pi / 2;

TEST(Cap, ClosedForms) {
  for (int n : {2, 3, 10, 100}) EXPECT_NEAR(cap_measure(n, kHalfPi), 0.5, 1e-14);
  EXPECT_NEAR(cap_measure(3, std::numbers::pi / 3), 0.25, 1e-14);
  // On S^1 the cap is an arc: alpha / pi.
  EXPECT_NEAR(cap_measure(2, 0.7), 0.7 / std::numbers::pi, 1e-13);
}

TEST(Cap, FrozenValues) {
  EXPECT_NEAR(cap_measure(100, kHalfPi - 0.2), 0.0232047472270500689, 1e-12);
  EXPECT_NEAR(cap_measure(10, 0.5), 0.000192205426892446685, 1e-15);
}

TEST(Cap, MonteCarlo) {
  numerics::Rng rng(1);
  const int n = 10;
  const double alpha = 1.2;
  int hits = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) hits += std::acos(rng.unit_vector(n)[0]) <= alpha;
  EXPECT_NEAR(static_cast<double>(hits) / trials, cap_measure(n, alpha), 0.005);
}

TEST(Cap, DomainErrors) {
  EXPECT_THROW(cap_measure(1, 0.5), ArgumentError);
  EXPECT_THROW(cap_measure(5, 0.0), ArgumentError);
  EXPECT_THROW(cap_measure(5, 2.0), ArgumentError);
}

TEST(Sphere, ClassOneIsLinearForConstantPsi) {
  SphereExampleParams p;
  const auto row = sphere_risk(p, 0.05);
  EXPECT_NEAR(0.5 * row.class1, 0.25, 1e-15);
  EXPECT_EQ(sphere_risk(p, 0.0).class2, 0.0);
  EXPECT_EQ(sphere_risk(p, 0.2).class1, 1.0);
}

TEST(Sphere, ExpDecayClassOne) {
  SphereExampleParams p;
  p.psi = Psi::ExpDecay;
  EXPECT_NEAR(sphere_risk(p, 0.05).class1, (std::exp(-0.05) - std::exp(-0.1)) / (1 - std::exp(-0.1)), 1e-15);
}

TEST(Sphere, JumpNearTheEquator) {
  SphereExampleParams p;
  const double edge = kHalfPi - p.theta0;
  EXPECT_GE(sphere_risk(p, edge + 0.1).risk - sphere_risk(p, edge - 0.1).risk, 0.2);
  EXPECT_LT(sphere_risk(p, edge - 0.3).class2, 0.01);
}

TEST(Sphere, CurveIsNondecreasingAndBounded) {
  for (auto psi : {Psi::Constant, Psi::ExpDecay}) {
    SphereExampleParams p;
    p.psi = psi;
    std::vector<double> grid;
    for (int i = 0; i <= 300; ++i) grid.push_back(i * std::numbers::pi / 300);
    const auto rows = sphere_risk_curve(p, grid);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GE(rows[i].risk, rows[i - 1].risk - 1e-15);
      EXPECT_LE(rows[i].risk, 1.0 + 1e-12);
    }
    EXPECT_NEAR(rows.back().risk, 1.0, 1e-12);
  }
}

TEST(Sphere, AsDisplayedBranch) {
  SphereExampleParams p;
  p.branch = SphereBranch::AsDisplayed;
  const double eps = kHalfPi - p.theta0 + 0.01;
  EXPECT_GE(sphere_risk(p, eps).class2, 0.999);
  p.branch = SphereBranch::Geometric;
  EXPECT_LT(sphere_risk(p, eps).class2, 0.75);
  // Visible overshoot past 1 in low dimension.
  SphereExampleParams low;
  low.n = 3;
  low.theta0 = 0.5;
  low.branch = SphereBranch::AsDisplayed;
  EXPECT_GT(sphere_risk(low, kHalfPi - 0.3).class2, 1.0);
  low.branch = SphereBranch::Geometric;
  EXPECT_LE(sphere_risk(low, kHalfPi - 0.3).class2, 1.0);
}

TEST(Cube, BoundAndConcentrationTuples) {
  CubeExampleParams p;
  p.alpha = std::log(2.0);
  p.epsilon = 0.1;
  EXPECT_NEAR(cube_risk_bound(p), 0.45, 1e-15);
  const auto [c, s] = cube_concentration(p);
  EXPECT_EQ(c.c, 0.5);
  EXPECT_DOUBLE_EQ(c.epsilon, std::log(2.0) / 10 - 1.0);
  EXPECT_EQ(c.delta, 0.0);
  EXPECT_EQ(s.epsilon, 0.1);
  EXPECT_EQ(s.delta, 0.0);
  EXPECT_DOUBLE_EQ(s.gamma, 0.25 + 0.2);
}

TEST(Cube, EmpiricalRiskBelowBound) {
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double eps : {0.0, 0.05, 0.1}) {
      CubeExampleParams p;
      p.alpha = alpha;
      p.epsilon = eps;
      const auto est = cube_empirical_risk(p, 10000, 7);
      EXPECT_LE(est.risk, est.bound) << alpha << " " << eps;
      EXPECT_NEAR(est.risk, p.gamma() / 4 + eps, 0.02) << alpha << " " << eps;
      EXPECT_EQ(est.samples, 10000u);
    }
  }
}

TEST(Cube, SamplesAndClassifier) {
  CubeExampleParams p;
  for (std::uint64_t s = 0; s < 200; ++s) {
    for (int label : {1, 2}) {
      const Vec x = cube_sample(p, label, s);
      ASSERT_EQ(x.size(), p.n);
      EXPECT_LE(x.cwiseAbs().maxCoeff(), 1.0);
      const double dist = cube_attack_distance(p, x, label);
      EXPECT_GE(dist, 0.0);
      if (cube_classify(p, x) != label) EXPECT_EQ(dist, 0.0);
    }
  }
}

TEST(Cube, Validation) {
  CubeExampleParams p;
  p.alpha = 0.0;
  EXPECT_THROW(cube_risk_bound(p), ArgumentError);
  p.alpha = 1.0;
  p.epsilon = 0.9;
  EXPECT_THROW(cube_risk_bound(p), ArgumentError);
}

TEST(Concentration, LineExample) {
  data::LabeledDataset ds;
  ds.dim = 1;
  ds.num_classes = 2;
  for (double v : {0.0, 1.0, 3.0, 10.0}) ds.points.push_back(Vec::Constant(1, v));
  ds.labels = {0, 0, 1, 1};
  const auto rows = empirical_concentration_curve(ds, {1, 2, 3});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].epsilon, 10.0);
  EXPECT_DOUBLE_EQ(rows[0].mass, 0.5);
  EXPECT_FALSE(rows[0].clamped);
  EXPECT_DOUBLE_EQ(rows[1].epsilon, 2.0);
  EXPECT_DOUBLE_EQ(rows[1].mass, 1.0);
  EXPECT_TRUE(rows[2].clamped);
}

TEST(Concentration, MassGrowsAndEpsilonShrinks) {
  numerics::Rng rng(9);
  data::LabeledDataset ds;
  ds.dim = 3;
  ds.num_classes = 2;
  for (int i = 0; i < 60; ++i) {
    Vec v = rng.gaussian(3, 1.0);
    v[0] += i % 2 ? 2.0 : -2.0;
    ds.points.push_back(v);
    ds.labels.push_back(i % 2);
  }
  const auto rows = empirical_concentration_curve(ds, {1, 2, 5, 10, 20, 30}, true);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].mass, rows[i - 1].mass);
    EXPECT_LE(rows[i].epsilon, rows[i - 1].epsilon);
  }
}

TEST(Shrinkage, FrozenValues) {
  const auto [tight, loose] = shrinkage_volume_bound(100, 0.05, 1.0);
  EXPECT_NEAR(tight, 0.00592052922033402548, 1e-16);
  EXPECT_NEAR(loose, 0.00673794699908546710, 1e-16);
  EXPECT_LE(tight, loose);
}

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "polycert/bpdn.hpp"

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

using namespace polycert;
using namespace polycert::bpdn;

namespace {

Mat random_unit_columns(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat s(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) s(i, j) = g(rng);
    s.col(j).normalize();
  }
  return s;
}

Vec random_vec(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * g(rng);
  return v;
}

}  // namespace

TEST(Solve, ZeroInput) {
  const auto sol = solve(Mat::Identity(2, 2), Vec::Zero(2), 3.0);
  EXPECT_EQ(sol.c, Vec::Zero(2));
  EXPECT_EQ(sol.d, Vec::Zero(2));
  EXPECT_EQ(sol.gap, 0.0);
  const auto rep = duality_gap_report(sol);
  EXPECT_EQ(rep.primal, 0.0);
  EXPECT_EQ(rep.dual, 0.0);
}

TEST(Solve, OrthonormalSoftThreshold) {
  const Mat s = Mat::Identity(2, 2);
  const auto sol = solve(s, Vec2(0.5, 0.0), 4.0);
  EXPECT_NEAR((sol.c - Vec2(0.25, 0.0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((sol.d - Vec2(1.0, 0.0)).norm(), 0.0, 1e-12);
  const auto rep = duality_gap_report(sol);
  EXPECT_NEAR(rep.primal, 0.375, 1e-12);
  EXPECT_NEAR(rep.dual, 0.375, 1e-12);
  const auto a = active_set(s, sol);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.entries[0], (ActiveEntry{0, 1}));
}

TEST(Solve, InteriorPointHasEmptyActiveSet) {
  const Mat s = Mat::Identity(2, 2);
  const auto sol = solve(s, Vec2(0.5, 0.0), 1.0);
  EXPECT_EQ(sol.c, Vec::Zero(2));
  EXPECT_NEAR((sol.d - Vec2(0.5, 0.0)).norm(), 0.0, 1e-15);
  EXPECT_TRUE(active_set(s, sol).empty());
}

TEST(Solve, VertexActiveSet) {
  const Mat s = Mat::Identity(2, 2);
  const auto sol = solve(s, Vec2(0.3, 0.3), 4.0);
  EXPECT_NEAR((sol.d - Vec2(1.0, 1.0)).norm(), 0.0, 1e-12);
  const auto a = active_set(s, sol);
  EXPECT_EQ(a.entries, (std::vector<ActiveEntry>{{0, 1}, {1, 1}}));
}

TEST(Solve, RandomOrthonormalMatchesSoftThresholdOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat q = Eigen::HouseholderQR<Mat>(random_unit_columns(6, 6, rng)).householderQ();
    const Vec x = random_vec(6, rng, 0.5);
    const double lambda = 1.0 + trial * 0.4;
    const auto sol = solve(q, x, lambda);
    for (Eigen::Index i = 0; i < 6; ++i) {
      const double z = q.col(i).dot(x);
      const double c = (z > 0 ? 1.0 : -1.0) * std::max(0.0, std::abs(z) - 1.0 / lambda);
      EXPECT_NEAR(sol.c[i], c, 1e-9);
    }
  }
}

TEST(Solve, InvariantsOnRandomInstances) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> nd(4, 32), md(8, 128);
  std::uniform_real_distribution<double> ld(0.5, 8.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = nd(rng), m = md(rng);
    const Mat s = random_unit_columns(n, m, rng);
    const Vec x = random_vec(n, rng).normalized();
    const double lambda = ld(rng);
    const auto sol = solve(s, x, lambda);
    EXPECT_LE(sol.gap, 1e-8 * std::max(1.0, std::abs(sol.primal_value)));
    EXPECT_GE(sol.gap, -1e-10);
    EXPECT_LT((sol.d - lambda * sol.e).norm(), 1e-10);
    EXPECT_LT((x - s * sol.c - sol.e).norm(), 1e-10);
    const auto kkt = check_kkt(s, sol);
    EXPECT_LE(kkt.feasibility, 1e-9);
    EXPECT_LE(kkt.stationarity, kDefaultTau);
    const auto a = active_set(s, sol);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (sol.c[i] == 0.0) continue;
      const ActiveEntry e{i, sol.c[i] > 0 ? 1 : -1};
      EXPECT_NE(std::find(a.entries.begin(), a.entries.end(), e), a.entries.end());
    }
  }
}

TEST(Solve, MatchesBruteForceProjection) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> nd(1, 3), md(1, 5);
  std::uniform_real_distribution<double> ld(0.5, 8.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = nd(rng), m = md(rng);
    const Mat s = random_unit_columns(n, m, rng);
    const Vec x = random_vec(n, rng);
    const double lambda = ld(rng);
    const auto sol = solve(s, x, lambda);
    const Vec p = oracle::project_dual_polytope(s, lambda * x);
    ASSERT_EQ(p.size(), n);
    EXPECT_LT((sol.d - p).norm(), 1e-6) << "trial " << trial;
  }
}

TEST(Solve, ScalingInvariance) {
  std::mt19937_64 rng(4);
  const Mat s = random_unit_columns(10, 30, rng);
  const Vec x = random_vec(10, rng).normalized();
  const auto a = solve(s, x, 2.0);
  for (double alpha : {0.25, 3.0}) {
    const auto b = solve(s, alpha * x, 2.0 / alpha);
    EXPECT_LT((a.d - b.d).norm(), 1e-8);
    EXPECT_EQ(active_set(s, a).entries, active_set(s, b).entries);
  }
}

TEST(Solve, ArgumentErrors) {
  const Mat s = Mat::Identity(2, 2);
  EXPECT_THROW(solve(s, Vec2(1, 0), 0.0), ArgumentError);
  EXPECT_THROW(solve(s, Vec2(1, 0), -1.0), ArgumentError);
  EXPECT_THROW(solve(s, Vec3(1, 0, 0), 1.0), ArgumentError);
  EXPECT_THROW(solve(s, Vec2(std::nan(""), 0), 1.0), ArgumentError);
  SolverOptions o;
  o.tol = 0.0;
  EXPECT_THROW(solve(s, Vec2(1, 0), 1.0, o), ArgumentError);
}

TEST(Solve, SweepCapRaisesConvergenceErrorWithBestIterate) {
  std::mt19937_64 rng(5);
  // Highly coherent columns: slow coordinate descent.
  Mat s = random_unit_columns(20, 80, rng);
  const Vec base = random_vec(20, rng).normalized();
  for (Eigen::Index j = 0; j < s.cols(); ++j) s.col(j) = (base + 0.05 * s.col(j)).normalized();
  const Vec x = (base + 0.3 * random_vec(20, rng).normalized()).normalized();
  SolverOptions o;
  o.max_sweeps = 1;
  o.polish = false;
  o.tol = 1e-14;
  try {
    solve(s, x, 8.0, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.gap(), 0.0);
    EXPECT_EQ(e.best().c.size(), 80);
  }
}

TEST(ActiveSet, NearDegenerateFlag) {
  const Mat s = Mat::Identity(2, 2);
  const double tau = 1e-6;
  const auto sol = solve(s, Vec2(0.5, (1.0 - 5 * tau) / 4.0), 4.0);
  const auto a = active_set(s, sol, tau);
  EXPECT_EQ(a.entries, (std::vector<ActiveEntry>{{0, 1}}));
  EXPECT_TRUE(a.near_degenerate);
  EXPECT_FALSE(active_set(s, solve(s, Vec2(0.5, 0.1), 4.0), tau).near_degenerate);
}

TEST(ActiveSet, ToleranceChecked) {
  const Mat s = Mat::Identity(2, 2);
  const auto sol = solve(s, Vec2(0.5, 0.0), 4.0);
  EXPECT_THROW(active_set(s, sol, 0.0), ArgumentError);
  EXPECT_THROW(active_set(s, sol, 1.0), ArgumentError);
  EXPECT_THROW(active_set(Mat::Identity(3, 3), sol), ArgumentError);
}

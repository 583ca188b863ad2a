#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "polycert/classifier.hpp"

using namespace polycert;
using namespace polycert::classifier;
using Vec2 = Eigen::Vector2d;

namespace {

std::shared_ptr<const data::Dictionary> square_dict() {
  return std::make_shared<const data::Dictionary>(Mat::Identity(2, 2), std::vector<Label>{0, 1}, 2);
}

DualOptions with_lambda(double lambda) {
  DualOptions o;
  o.lambda = lambda;
  return o;
}

}  // namespace

TEST(Dual, SquareExampleLabels) {
  const auto dict = square_dict();
  const auto p = predict_dual(dict, Vec2(0.5, 0.0), with_lambda(4.0));
  EXPECT_EQ(p.prediction.label, 0);
  EXPECT_EQ(p.prediction.votes, (std::vector<int>{1, 0}));
  ASSERT_TRUE(p.certificate.has_value());
  EXPECT_EQ(predict_dual(dict, Vec2(0.0, -0.5), with_lambda(4.0)).prediction.label, 1);
}

TEST(Dual, EmptyActiveSetAbstains) {
  const auto p = predict_dual(square_dict(), Vec2(0.5, 0.0), with_lambda(1.0));
  EXPECT_EQ(p.prediction.label, kAbstain);
  EXPECT_FALSE(p.certificate.has_value());
  EXPECT_EQ(p.prediction.active_size, 0u);
}

TEST(Dual, TiesAndUnanimity) {
  const auto dict = square_dict();
  EXPECT_EQ(predict_dual(dict, Vec2(0.3, 0.3), with_lambda(4.0)).prediction.label, 0);
  auto o = with_lambda(4.0);
  o.rule = AggregationRule::UnanimousOrAbstain;
  EXPECT_EQ(predict_dual(dict, Vec2(0.3, 0.3), o).prediction.label, kAbstain);
  EXPECT_EQ(predict_dual(dict, Vec2(0.0, 0.4), o).prediction.label, 1);
}

TEST(Dual, RuleNames) {
  EXPECT_EQ(parse_rule("majority"), AggregationRule::Majority);
  EXPECT_EQ(parse_rule("unanimous"), AggregationRule::UnanimousOrAbstain);
  EXPECT_EQ(to_string(AggregationRule::Majority), "majority");
  EXPECT_THROW(parse_rule("plurality"), ArgumentError);
}

TEST(Dual, LabelOnlyMatchesFullPrediction) {
  const auto model = data::random_subspace_model(3, 12, 2, 0.0, 1);
  const auto train = data::generate_uos(model, 20, 2);
  const auto dict = std::make_shared<const data::Dictionary>(data::build_dictionary(train, 60, 3));
  const auto test = data::generate_uos(model, 10, 4);
  for (const Vec& x : test.points) {
    EXPECT_EQ(predict_dual_label(*dict, x, with_lambda(3.0)), predict_dual(dict, x, with_lambda(3.0)).prediction.label);
  }
}

TEST(Dual, ColumnPermutationDoesNotChangeThePrediction) {
  const auto model = data::random_subspace_model(2, 10, 2, 0.0, 5);
  const auto train = data::generate_uos(model, 15, 6);
  const auto dict = data::build_dictionary(train, 30, 7);
  std::vector<Eigen::Index> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
  Mat atoms(10, 30);
  std::vector<Label> labels(30);
  for (Eigen::Index j = 0; j < 30; ++j) {
    atoms.col(j) = dict.atoms().col(perm[static_cast<std::size_t>(j)]);
    labels[static_cast<std::size_t>(j)] = dict.label(perm[static_cast<std::size_t>(j)]);
  }
  const auto a = std::make_shared<const data::Dictionary>(dict);
  const auto b = std::make_shared<const data::Dictionary>(atoms, labels, 2);
  for (const Vec& x : data::generate_uos(model, 10, 9).points) {
    const auto pa = predict_dual(a, x, with_lambda(3.0));
    const auto pb = predict_dual(b, x, with_lambda(3.0));
    EXPECT_EQ(pa.prediction.label, pb.prediction.label);
    EXPECT_EQ(pa.prediction.votes, pb.prediction.votes);
    EXPECT_LT((pa.solution.d - pb.solution.d).norm(), 1e-7);
  }
}

TEST(Dual, ScaleConsistency) {
  const auto model = data::random_subspace_model(2, 10, 2, 0.0, 10);
  const auto dict = std::make_shared<const data::Dictionary>(data::build_dictionary(data::generate_uos(model, 15, 11), 30, 12));
  for (const Vec& x : data::generate_uos(model, 10, 13).points) {
    const auto a = predict_dual(dict, x, with_lambda(2.0));
    const auto b = predict_dual(dict, 4.0 * x, with_lambda(0.5));
    EXPECT_EQ(a.prediction.label, b.prediction.label);
    EXPECT_TRUE(a.active.same_entries(b.active));
  }
}

TEST(Dual, CertificateContainsTheAnchor) {
  const auto model = data::random_subspace_model(2, 10, 2, 0.02, 14);
  const auto dict = std::make_shared<const data::Dictionary>(data::build_dictionary(data::generate_uos(model, 20, 15), 40, 16));
  for (const Vec& x : data::generate_uos(model, 10, 17).points) {
    const auto p = predict_dual(dict, x, with_lambda(3.0));
    if (!p.certificate) continue;
    EXPECT_TRUE(certificate::contains(*p.certificate, x));
    EXPECT_EQ(p.certificate->anchor(), x);
  }
}

TEST(NearestSubspace, TiesGoToTheLowerId) {
  data::SubspaceModel m;
  m.bases = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  EXPECT_EQ(predict_nearest_subspace(m, Vec2(1.0, 1.0)), 0);
  EXPECT_EQ(predict_nearest_subspace(m, Vec2(0.2, 1.0)), 1);
  const Vec s = score_nearest_subspace(m, Vec2(0.2, 1.0));
  EXPECT_NEAR(s[0], -1.0, 1e-15);
  EXPECT_NEAR(s[1], -0.2, 1e-15);
}

TEST(NearestSubspace, PerfectOnNarrowUnion) {
  const auto model = data::random_subspace_model(2, 20, 3, 0.05, 18);
  const auto test = data::generate_uos(model, 500, 19);
  int correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Vec s = score_nearest_subspace(model, test.points[i]);
    Eigen::Index arg = 0;
    s.maxCoeff(&arg);
    const Label p = predict_nearest_subspace(model, test.points[i]);
    EXPECT_EQ(p, static_cast<Label>(arg));
    correct += p == test.labels[i];
  }
  EXPECT_EQ(correct, 1000);
}

TEST(NearestSubspace, GradientMatchesFiniteDifferences) {
  const auto model = data::random_subspace_model(2, 6, 2, 0.0, 20);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  Vec x(6);
  for (auto& v : x) v = g(rng);
  for (int k = 0; k < 2; ++k) {
    const Vec grad = score_gradient(model, x, k);
    for (Eigen::Index i = 0; i < 6; ++i) {
      Vec xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const double fd = (score_nearest_subspace(model, xp)[k] - score_nearest_subspace(model, xm)[k]) / 2e-6;
      EXPECT_NEAR(grad[i], fd, 1e-6);
    }
  }
}

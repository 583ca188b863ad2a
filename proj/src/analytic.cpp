#include "polycert/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "polycert/numerics.hpp"

namespace polycert::analytic {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Cap area for any alpha in [0, pi].
double cap_full(int n, double alpha) {
  if (alpha <= 0.0) return 0.0;
  if (alpha >= std::numbers::pi) return 1.0;
  if (alpha <= kHalfPi) return cap_measure(n, alpha);
  return 1.0 - cap_measure(n, std::numbers::pi - alpha);
}

}  // namespace

double cap_measure(int n, double alpha) {
  if (n < 2) throw ArgumentError("cap_measure: n must be >= 2");
  if (!(alpha > 0.0) || alpha > kHalfPi + 1e-15) throw ArgumentError("cap_measure: alpha must lie in (0, pi/2]");
  const double s = std::sin(std::min(alpha, kHalfPi));
  return 0.5 * numerics::reg_inc_beta(std::min(1.0, s * s), 0.5 * (n - 1), 0.5);
}

void SphereExampleParams::validate() const {
  if (n < 2) throw ArgumentError("sphere example: n must be >= 2");
  if (!(theta0 > 0.0) || theta0 > kHalfPi) throw ArgumentError("sphere example: theta0 must lie in (0, pi/2]");
}

double SphereExampleParams::c_psi() const {
  return psi == Psi::Constant ? theta0 : 1.0 - std::exp(-theta0);
}

SphereRiskRow sphere_risk(const SphereExampleParams& p, double eps) {
  p.validate();
  if (!(eps >= 0.0) || eps > std::numbers::pi) throw ArgumentError("sphere_risk: epsilon must lie in [0, pi]");
  SphereRiskRow row;
  row.epsilon = eps;

  if (eps >= p.theta0) {
    row.class1 = 1.0;
  } else if (p.psi == Psi::Constant) {
    row.class1 = eps / p.theta0;
  } else {
    row.class1 = (std::exp(-(p.theta0 - eps)) - std::exp(-p.theta0)) / p.c_psi();
  }

  const double m0 = cap_measure(p.n, p.theta0);
  const double d = 2.0 * cap_measure(p.n, kHalfPi) - m0;
  const double reach = p.theta0 + eps;
  if (reach <= kHalfPi) {
    row.class2 = (cap_measure(p.n, reach) - m0) / d;
  } else if (p.branch == SphereBranch::Geometric) {
    row.class2 = (cap_full(p.n, reach) - m0) / d;
  } else if (reach <= std::numbers::pi) {
    const double back = reach - kHalfPi;
    row.class2 = (2.0 * cap_measure(p.n, kHalfPi) - (back > 0.0 ? cap_measure(p.n, back) : 0.0)) / d;
  } else {
    row.class2 = 1.0 / d;
  }
  row.risk = 0.5 * row.class1 + 0.5 * row.class2;
  return row;
}

std::vector<SphereRiskRow> sphere_risk_curve(const SphereExampleParams& params, const std::vector<double>& eps_grid) {
  std::vector<SphereRiskRow> out;
  out.reserve(eps_grid.size());
  for (double eps : eps_grid) out.push_back(sphere_risk(params, eps));
  return out;
}

void CubeExampleParams::validate() const {
  if (n < 2) throw ArgumentError("cube example: n must be >= 2");
  if (!(alpha > 0.0)) throw ArgumentError("cube example: alpha must be positive");
  if (!(epsilon >= 0.0)) throw ArgumentError("cube example: epsilon must be >= 0");
  if (gamma() / 2.0 + epsilon > 1.0) throw ArgumentError("cube example: gamma/2 + eps must be <= 1");
}

double CubeExampleParams::gamma() const { return std::exp(-alpha); }

double cube_risk_bound(const CubeExampleParams& params) {
  params.validate();
  return 0.5 * (std::exp(-params.alpha) + 4.0 * params.epsilon);
}

std::pair<ConcentrationParams, StrongConcentrationParams> cube_concentration(const CubeExampleParams& params) {
  params.validate();
  ConcentrationParams c{0.5, params.alpha / params.n - 1.0, 0.0};
  StrongConcentrationParams s{params.epsilon, 0.0, 0.5 * std::exp(-params.alpha) + 2.0 * params.epsilon};
  return {c, s};
}

int cube_classify(const CubeExampleParams& params, const Vec& x) {
  const double a = params.gamma() / 2.0 + params.epsilon;
  const double x1 = std::abs(x[0]);
  const double x2 = std::abs(x[1]);
  if (x2 <= a && x1 >= a) return 2;
  return 1;
}

double cube_attack_distance(const CubeExampleParams& params, const Vec& x, int label) {
  const double a = params.gamma() / 2.0 + params.epsilon;
  const double x1 = std::abs(x[0]);
  const double x2 = std::abs(x[1]);
  if (cube_classify(params, x) != label) return 0.0;
  if (label == 1) {
    // Reach {|x1| >= a, |x2| <= a}.
    const double d1 = std::max(0.0, a - x1);
    const double d2 = std::max(0.0, x2 - a);
    return std::hypot(d1, d2);
  }
  // Leave {|x1| >= a, |x2| <= a}: cross either boundary.
  return std::min(x1 - a, a - x2);
}

Vec cube_sample(const CubeExampleParams& params, int label, std::uint64_t seed) {
  numerics::Rng rng(seed);
  Vec x(params.n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 2.0 * rng.uniform() - 1.0;
  const double half = params.gamma() / 2.0;
  x[label == 1 ? 0 : 1] = half * (2.0 * rng.uniform() - 1.0);
  return x;
}

CubeEstimate cube_empirical_risk(const CubeExampleParams& params, std::size_t samples, std::uint64_t seed) {
  params.validate();
  if (samples < 2) throw ArgumentError("cube_empirical_risk: need at least 2 samples");
  CubeEstimate out;
  out.samples = samples;
  out.bound = cube_risk_bound(params);
  std::size_t hits[2] = {0, 0};
  std::size_t counts[2] = {0, 0};
  for (std::size_t i = 0; i < samples; ++i) {
    const int label = 1 + static_cast<int>(i % 2);
    const Vec x = cube_sample(params, label, numerics::derive_seed(seed, i));
    ++counts[label - 1];
    if (cube_attack_distance(params, x, label) <= params.epsilon) ++hits[label - 1];
  }
  out.class1 = static_cast<double>(hits[0]) / static_cast<double>(counts[0]);
  out.class2 = static_cast<double>(hits[1]) / static_cast<double>(counts[1]);
  out.risk = 0.5 * out.class1 + 0.5 * out.class2;
  return out;
}

std::vector<ConcentrationRow> empirical_concentration_curve(const data::LabeledDataset& dataset,
                                                            const std::vector<std::size_t>& m_grid,
                                                            bool within_class) {
  dataset.validate();
  if (dataset.size() < 2) throw ArgumentError("empirical_concentration_curve: need at least 2 points");
  const std::size_t total = dataset.size();

  std::vector<double> nn(total, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      if (i == j) continue;
      if (within_class && dataset.labels[i] != dataset.labels[j]) continue;
      nn[i] = std::min(nn[i], (dataset.points[i] - dataset.points[j]).norm());
    }
  }

  const auto k = static_cast<std::size_t>(dataset.num_classes);
  std::vector<std::vector<std::size_t>> order(k);
  for (std::size_t i = 0; i < total; ++i) order[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  for (auto& members : order) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return nn[a] > nn[b]; });
  }

  std::vector<ConcentrationRow> out;
  for (std::size_t m : m_grid) {
    ConcentrationRow row;
    row.m = m;
    double min_frac = 1.0;
    std::vector<std::size_t> take(k);
    for (std::size_t c = 0; c < k; ++c) {
      take[c] = std::min(m, order[c].size());
      if (take[c] < m && !order[c].empty()) row.clamped = true;
      if (!order[c].empty()) {
        min_frac = std::min(min_frac, static_cast<double>(take[c]) / static_cast<double>(order[c].size()));
      }
    }
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t c1 = 0; c1 < k; ++c1) {
      for (std::size_t c2 = c1 + 1; c2 < k; ++c2) {
        for (std::size_t a = 0; a < take[c1]; ++a) {
          for (std::size_t b = 0; b < take[c2]; ++b) {
            sep = std::min(sep, (dataset.points[order[c1][a]] - dataset.points[order[c2][b]]).norm());
          }
        }
      }
    }
    row.epsilon = sep;
    row.mass = min_frac;
    out.push_back(row);
  }
  return out;
}

std::pair<double, double> shrinkage_volume_bound(int n, double eps, double vol_a) {
  if (n < 1) throw ArgumentError("shrinkage_volume_bound: n must be >= 1");
  if (!(eps >= 0.0) || eps >= 1.0) throw ArgumentError("shrinkage_volume_bound: eps must lie in [0, 1)");
  return {vol_a * std::pow(1.0 - eps, n), vol_a * std::exp(-n * eps)};
}

}  // namespace polycert::analytic

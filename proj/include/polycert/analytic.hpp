#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "polycert/common.hpp"
#include "polycert/data.hpp"

namespace polycert::analytic {

/// (C, eps, delta): mass 1 - delta on a set of volume <= C exp(-n eps).
struct ConcentrationParams {
  double c = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
};

/// (eps, delta, gamma): concentration plus q_k(S_{k'}^{+2 eps}) <= gamma.
struct StrongConcentrationParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
};

/// Normalized area of the hyperspherical cap {theta <= alpha} on S^{n-1}:
/// 0.5 I_{sin^2 alpha}((n-1)/2, 1/2), for 0 < alpha <= pi/2.
double cap_measure(int n, double alpha);

enum class Psi { Constant, ExpDecay };

/// Class-2 branch for theta0 + eps >= pi/2. Geometric uses the cap area past
/// the equator, 1 - m(pi - theta0 - eps); AsDisplayed evaluates the printed
/// expression 2 m(pi/2) - m(theta0 + eps - pi/2), which jumps above 1.
enum class SphereBranch { Geometric, AsDisplayed };

struct SphereExampleParams {
  int n = 100;
  double theta0 = 0.1;
  Psi psi = Psi::Constant;
  SphereBranch branch = SphereBranch::Geometric;

  void validate() const;
  /// c_psi = integral of psi over [0, theta0].
  double c_psi() const;
};

struct SphereRiskRow {
  double epsilon = 0.0;
  /// q1 of the eps-expansion of C2.
  double class1 = 0.0;
  /// q2 of the eps-expansion of C1.
  double class2 = 0.0;
  /// 0.5 class1 + 0.5 class2.
  double risk = 0.0;
};

SphereRiskRow sphere_risk(const SphereExampleParams& params, double epsilon);
std::vector<SphereRiskRow> sphere_risk_curve(const SphereExampleParams& params, const std::vector<double>& eps_grid);

struct CubeExampleParams {
  int n = 10;
  double alpha = 1.0;
  double epsilon = 0.0;

  void validate() const;
  double gamma() const;
};

/// 0.5 (exp(-alpha) + 4 eps).
double cube_risk_bound(const CubeExampleParams& params);

/// (0.5, alpha/n - 1, 0) and (eps, 0, exp(-alpha)/2 + 2 eps).
std::pair<ConcentrationParams, StrongConcentrationParams> cube_concentration(const CubeExampleParams& params);

/// The cube classifier with threshold a = gamma/2 + eps (labels 1 and 2).
int cube_classify(const CubeExampleParams& params, const Vec& x);

/// Exact l2 distance from x to the nearest point of the cube classified
/// differently from `label`; depends only on the first two coordinates.
double cube_attack_distance(const CubeExampleParams& params, const Vec& x, int label);

/// Point of class `label` (1 or 2) drawn from its class conditional.
Vec cube_sample(const CubeExampleParams& params, int label, std::uint64_t seed);

struct CubeEstimate {
  double risk = 0.0;
  double bound = 0.0;
  double class1 = 0.0;
  double class2 = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo robust risk with `samples` draws (balanced classes) under the
/// exact worst-case perturbation.
CubeEstimate cube_empirical_risk(const CubeExampleParams& params, std::size_t samples, std::uint64_t seed);

struct ConcentrationRow {
  std::size_t m = 0;
  double epsilon = 0.0;
  /// 1 - delta_m.
  double mass = 0.0;
  /// m exceeded some class size and was clamped.
  bool clamped = false;
};

/// Greedy curve: per class, take the first m points by decreasing
/// nearest-neighbour distance (ties by index); eps_m is the least cross-class
/// distance between the selected sets and delta_m = 1 - min_k |S_k| / N_k.
std::vector<ConcentrationRow> empirical_concentration_curve(const data::LabeledDataset& dataset,
                                                            const std::vector<std::size_t>& m_grid,
                                                            bool within_class = false);

/// vol_A (1 - eps)^n and the looser vol_A exp(-n eps).
std::pair<double, double> shrinkage_volume_bound(int n, double eps, double vol_a);

}  // namespace polycert::analytic

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "polycert/certificate.hpp"
#include "polycert/common.hpp"
#include "polycert/data.hpp"
#include "polycert/smoothing.hpp"

namespace polycert::attacks {

struct AttackConfig {
  double epsilon = 0.0;
  int steps = 20;
  double step_size = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Classifier under attack. `loss_gradient(x, y)` is an ascent direction for a
/// loss that grows as x moves away from class y; it may be empty for
/// label-only targets.
struct AttackTarget {
  std::function<Label(const Vec&)> predict;
  std::function<Vec(const Vec&, Label)> loss_gradient;
};

struct AttackStep {
  int step = 0;
  double l2 = 0.0;
  Label label = kAbstain;
  bool in_certificate = false;
};

struct AttackResult {
  Vec adversarial_x;
  bool success = false;
  double final_l2 = 0.0;
  bool in_certificate = false;
  std::vector<AttackStep> transcript;
};

struct PgdOptions {
  /// Alternations between the ball and certificate projections per step.
  int max_alternations = 50;
  /// Keep every inactive activity <t, lambda x'> at or below 1 - face_margin,
  /// capped at half the anchor's own slack. Active-set identification treats
  /// activities within tau of 1 as active, so values above tau keep the
  /// identified active set fixed. Zero attacks the closed set.
  double face_margin = 0.0;
};

/// Two-step projected ascent restricted to B(x, eps) ∩ C(x):
///   I.  z = Proj_B(x^t + eta g / ||g||),  g = loss_gradient(x^t, y)
///   II. x^{t+1} = Proj_C(z)
/// The pair of projections is alternated to a fixed point; a final shrink
/// toward x restores ball feasibility, so every iterate lies in both sets.
/// Stops at the first misclassified iterate.
AttackResult pgd_in_certificate(const AttackTarget& target, const Vec& x, Label y,
                                const certificate::CertificatePolyhedron& cert, const AttackConfig& cfg,
                                const PgdOptions& opts = {});

struct BoundaryOptions {
  int init_trials = 200;
  int probes = 50;
  double binary_tol = 1e-4;
};

/// Decision-based attack: random-search initialization, binary search to the
/// boundary, then rounds of sign-probe gradient estimation and re-projection
/// onto the boundary. Uses cfg.steps rounds; cfg.epsilon is not a constraint.
AttackResult boundary_attack(const std::function<Label(const Vec&)>& predict, const Vec& x, Label y,
                             const AttackConfig& cfg, const BoundaryOptions& opts = {});

using AttackFn = std::function<AttackResult(const Vec& x, Label y)>;

/// Fraction of points that are misclassified (abstain included) or for which
/// the attack finds a misclassified point within l2 distance epsilon.
double estimate_robust_risk(const std::function<Label(const Vec&)>& predict, const data::LabeledDataset& dataset,
                            const AttackFn& attack, double epsilon);

/// Gradient of max_{k != y} s_k(x) - s_y(x) for nearest-subspace scores.
Vec margin_loss_gradient(const data::SubspaceModel& model, const Vec& x, Label y);

/// Soft-vote surrogate for a smoothed nearest-subspace classifier: the margin
/// loss gradient averaged over `samples` Gaussian perturbations of x.
Vec soft_vote_gradient(const data::SubspaceModel& model, const Vec& x, Label y, double sigma, int samples,
                       std::uint64_t seed);

}  // namespace polycert::attacks

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polycert/bpdn.hpp"
#include "polycert/certificate.hpp"
#include "polycert/common.hpp"
#include "polycert/data.hpp"

namespace polycert::classifier {

enum class AggregationRule { Majority, UnanimousOrAbstain };

std::string to_string(AggregationRule rule);
/// Accepts "majority" and "unanimous".
AggregationRule parse_rule(const std::string& name);

struct Prediction {
  Label label = kAbstain;
  /// Per-class vote counts from the active set.
  std::vector<int> votes;
  std::size_t active_size = 0;
};

/// Labels of the active columns (sign ignored) aggregated by `rule`. Ties go
/// to the lowest class id; an empty active set abstains.
Prediction aggregate(const data::Dictionary& dict, const bpdn::ActiveSet& active, AggregationRule rule);

struct DualPrediction {
  Prediction prediction;
  bpdn::DualSolution solution;
  bpdn::ActiveSet active;
  /// Present when the active set is nonempty.
  std::optional<certificate::CertificatePolyhedron> certificate;
};

struct DualOptions {
  double lambda = 2.0;
  AggregationRule rule = AggregationRule::Majority;
  double tau = bpdn::kDefaultTau;
  bpdn::SolverOptions solver{};
  bool build_certificate = true;
};

/// g_lambda(x): BPDN dual, active set, label aggregation.
DualPrediction predict_dual(const std::shared_ptr<const data::Dictionary>& dict, const Vec& x,
                            const DualOptions& opts = {});

/// Label only; skips building the certificate.
Label predict_dual_label(const data::Dictionary& dict, const Vec& x, const DualOptions& opts = {});

/// Scores s_k = -||x - U_k U_k^T x||.
Vec score_nearest_subspace(const data::SubspaceModel& model, const Vec& x);

/// argmin_k ||x - U_k U_k^T x||, ties to the lowest k.
Label predict_nearest_subspace(const data::SubspaceModel& model, const Vec& x);

/// Gradient of score_nearest_subspace(model, x)[k] with respect to x.
Vec score_gradient(const data::SubspaceModel& model, const Vec& x, int k);

}  // namespace polycert::classifier

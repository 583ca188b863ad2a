#include "polycert/classifier.hpp"

#include <algorithm>

namespace polycert::classifier {

std::string to_string(AggregationRule rule) {
  return rule == AggregationRule::Majority ? "majority" : "unanimous";
}

AggregationRule parse_rule(const std::string& name) {
  if (name == "majority") return AggregationRule::Majority;
  if (name == "unanimous") return AggregationRule::UnanimousOrAbstain;
  throw ArgumentError("unknown aggregation rule '" + name + "' (expected majority or unanimous)");
}

Prediction aggregate(const data::Dictionary& dict, const bpdn::ActiveSet& active, AggregationRule rule) {
  Prediction p;
  p.votes.assign(static_cast<std::size_t>(dict.num_classes()), 0);
  p.active_size = active.size();
  for (const auto& e : active.entries) ++p.votes[static_cast<std::size_t>(dict.label(e.index))];
  if (active.empty()) return p;

  const auto top = std::max_element(p.votes.begin(), p.votes.end());
  const auto winner = static_cast<Label>(top - p.votes.begin());
  if (rule == AggregationRule::Majority) {
    p.label = winner;
  } else if (static_cast<std::size_t>(*top) == active.size()) {
    p.label = winner;
  }
  return p;
}

DualPrediction predict_dual(const std::shared_ptr<const data::Dictionary>& dict, const Vec& x,
                            const DualOptions& opts) {
  if (!dict) throw ArgumentError("predict_dual: null dictionary");
  DualPrediction out;
  out.solution = bpdn::solve(*dict, x, opts.lambda, opts.solver);
  out.active = bpdn::active_set(*dict, out.solution, opts.tau);
  out.prediction = aggregate(*dict, out.active, opts.rule);
  if (opts.build_certificate && !out.active.empty()) {
    out.certificate.emplace(dict, out.solution, out.active);
  }
  return out;
}

Label predict_dual_label(const data::Dictionary& dict, const Vec& x, const DualOptions& opts) {
  const auto sol = bpdn::solve(dict, x, opts.lambda, opts.solver);
  return aggregate(dict, bpdn::active_set(dict, sol, opts.tau), opts.rule).label;
}

Vec score_nearest_subspace(const data::SubspaceModel& model, const Vec& x) {
  if (x.size() != model.dim()) throw ArgumentError("score_nearest_subspace: dimension mismatch");
  Vec s(model.num_classes());
  for (int k = 0; k < model.num_classes(); ++k) {
    s[k] = -data::distance_to_subspace(model.bases[static_cast<std::size_t>(k)], x);
  }
  return s;
}

Label predict_nearest_subspace(const data::SubspaceModel& model, const Vec& x) {
  const Vec s = score_nearest_subspace(model, x);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < s.size(); ++k) {
    if (s[k] > s[best]) best = k;
  }
  return static_cast<Label>(best);
}

Vec score_gradient(const data::SubspaceModel& model, const Vec& x, int k) {
  const Mat& u = model.bases.at(static_cast<std::size_t>(k));
  const Vec resid = x - u * (u.transpose() * x);
  const double nrm = resid.norm();
  if (nrm == 0.0) return Vec::Zero(x.size());
  return -resid / nrm;
}

}  // namespace polycert::classifier

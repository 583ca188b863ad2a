#include "polycert/smoothing.hpp"

#include <map>

namespace polycert::smoothing {

namespace {

std::map<Label, int> tally(const BaseClassifier& base, const Vec& x, const SmoothingConfig& cfg, int count,
                           std::uint64_t first_stream) {
  std::map<Label, int> votes;
  for (int i = 0; i < count; ++i) {
    const auto seed = numerics::derive_seed(cfg.seed, first_stream + static_cast<std::uint64_t>(i));
    const Label y = base(x + numerics::gaussian_sample(seed, x.size(), cfg.sigma));
    if (y != kAbstain) ++votes[y];
  }
  return votes;
}

Label winner(const std::map<Label, int>& votes) {
  Label best = kAbstain;
  int best_count = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

void SmoothingConfig::validate() const {
  if (!(sigma > 0.0)) throw ArgumentError("smoothing: sigma must be positive");
  if (n0 < 1 || n < 1) throw ArgumentError("smoothing: n0 and n must be >= 1");
}

SmoothingConfig for_point(const SmoothingConfig& cfg, std::uint64_t index) {
  SmoothingConfig out = cfg;
  out.seed = numerics::derive_seed(cfg.seed, index);
  return out;
}

Label smooth_predict(const BaseClassifier& base, const Vec& x, const SmoothingConfig& cfg) {
  cfg.validate();
  return winner(tally(base, x, cfg, cfg.n0, 0));
}

SmoothingCertificate smooth_certify(const BaseClassifier& base, const Vec& x, const SmoothingConfig& cfg) {
  cfg.validate();
  SmoothingCertificate out;
  const Label selected = winner(tally(base, x, cfg, cfg.n0, 0));
  if (selected == kAbstain) return out;
  const auto votes = tally(base, x, cfg, cfg.n, static_cast<std::uint64_t>(cfg.n0));
  const auto it = votes.find(selected);
  out.count = it == votes.end() ? 0 : it->second;
  out.p_lower = numerics::clopper_pearson_lower(out.count, cfg.n, cfg.confidence);
  if (out.p_lower > 0.5) {
    out.predicted = selected;
    out.radius = cfg.sigma * numerics::inv_norm_cdf(out.p_lower);
  }
  return out;
}

double all_agree_radius(const SmoothingConfig& cfg) {
  cfg.validate();
  const double p = numerics::clopper_pearson_lower(cfg.n, cfg.n, cfg.confidence);
  return p > 0.5 ? cfg.sigma * numerics::inv_norm_cdf(p) : 0.0;
}

std::vector<CurvePoint> accuracy_curve(const std::vector<SmoothingCertificate>& certs, const std::vector<Label>& labels,
                                       const std::vector<double>& radii) {
  if (certs.size() != labels.size()) throw ArgumentError("accuracy_curve: certificates/labels length mismatch");
  if (certs.empty()) throw ArgumentError("accuracy_curve: no points");
  std::vector<CurvePoint> out;
  out.reserve(radii.size());
  for (double eps : radii) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < certs.size(); ++i) {
      if (certs[i].predicted != kAbstain && certs[i].predicted == labels[i] && certs[i].radius >= eps) ++hits;
    }
    out.push_back({eps, static_cast<double>(hits) / static_cast<double>(certs.size())});
  }
  return out;
}

std::vector<CurvePoint> certified_accuracy_curve(const BaseClassifier& base, const data::LabeledDataset& dataset,
                                                 const SmoothingConfig& cfg, const std::vector<double>& radii) {
  if (dataset.empty()) throw ArgumentError("certified_accuracy_curve: empty dataset");
  std::vector<SmoothingCertificate> certs;
  certs.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    certs.push_back(smooth_certify(base, dataset.points[i], for_point(cfg, i)));
  }
  return accuracy_curve(certs, dataset.labels, radii);
}

}  // namespace polycert::smoothing

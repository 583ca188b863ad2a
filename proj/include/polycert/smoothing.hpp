#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "polycert/common.hpp"
#include "polycert/data.hpp"
#include "polycert/numerics.hpp"

namespace polycert::smoothing {

/// Deterministic base classifier; may return kAbstain.
using BaseClassifier = std::function<Label(const Vec&)>;

struct SmoothingConfig {
  double sigma = 0.02;
  int n0 = 100;
  int n = 100;
  numerics::ConfidenceLevel confidence{0.999};
  std::uint64_t seed = 0;

  void validate() const;
};

struct SmoothingCertificate {
  Label predicted = kAbstain;
  double p_lower = 0.0;
  double radius = 0.0;
  /// Votes for `predicted` among the n estimation samples.
  int count = 0;
};

/// Majority label of the base classifier over n0 noisy copies of x. Base
/// abstentions are not counted; ties go to the lowest label; no votes at all
/// abstains. Noise sample i uses the seed derive_seed(cfg.seed, i).
Label smooth_predict(const BaseClassifier& base, const Vec& x, const SmoothingConfig& cfg);

/// Selects the class on n0 samples, then bounds its probability from below
/// with a one-sided Clopper-Pearson interval on n fresh samples. Certifies
/// radius sigma * Phi^{-1}(p_lower) when p_lower > 1/2, abstains otherwise.
SmoothingCertificate smooth_certify(const BaseClassifier& base, const Vec& x, const SmoothingConfig& cfg);

/// Certificate value when all n estimation votes agree.
double all_agree_radius(const SmoothingConfig& cfg);

struct CurvePoint {
  double epsilon = 0.0;
  double certified_accuracy = 0.0;
};

/// Fraction of points predicted correctly (not abstained) with radius >= epsilon.
std::vector<CurvePoint> accuracy_curve(const std::vector<SmoothingCertificate>& certs, const std::vector<Label>& labels,
                                       const std::vector<double>& radii);

/// Certifies every point (point i with seed derive_seed(cfg.seed, i)) and
/// tabulates accuracy_curve.
std::vector<CurvePoint> certified_accuracy_curve(const BaseClassifier& base, const data::LabeledDataset& dataset,
                                                 const SmoothingConfig& cfg, const std::vector<double>& radii);

/// Config for point `index` of a dataset run.
SmoothingConfig for_point(const SmoothingConfig& cfg, std::uint64_t index);

}  // namespace polycert::smoothing

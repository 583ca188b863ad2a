#pragma once

#include <cstdint>
#include <random>

#include "polycert/common.hpp"

namespace polycert::numerics {

/// Confidence level strictly inside (0, 1).
class ConfidenceLevel {
 public:
  explicit ConfidenceLevel(double level);
  double value() const noexcept { return level_; }

 private:
  double level_;
};

/// Iteration cap of the continued fraction in reg_inc_beta.
inline constexpr int kBetaMaxIterations = 1000;

/// Regularized incomplete beta function I_x(a, b).
///
/// Evaluated with the modified Lentz continued fraction, switching to the
/// symmetric form I_x(a,b) = 1 - I_{1-x}(b,a) when x > (a+1)/(a+b+2) so the
/// fraction converges quickly. Absolute error is below 1e-10 for the
/// parameter ranges used here (a, b up to a few thousand).
double reg_inc_beta(double x, double a, double b);

/// Standard normal CDF.
double norm_cdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step against norm_cdf.
double inv_norm_cdf(double p);

/// One-sided Clopper-Pearson lower confidence bound on a binomial success
/// probability: the p with P[Bin(trials, p) >= successes] = 1 - conf.
double clopper_pearson_lower(std::int64_t successes, std::int64_t trials, ConfidenceLevel conf);

/// Mixes (seed, stream) into an independent 64-bit seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator used by every stochastic operation in the library.
/// The engine is mt19937_64, whose output sequence is fixed by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

  /// i.i.d. N(0, sigma^2) vector.
  Vec gaussian(Eigen::Index dim, double sigma);
  /// Uniform direction on the unit sphere S^{dim-1}.
  Vec unit_vector(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// i.i.d. N(0, sigma^2) vector of length dim, reproducible under seed.
Vec gaussian_sample(std::uint64_t seed, Eigen::Index dim, double sigma);

}  // namespace polycert::numerics

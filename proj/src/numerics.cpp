#include "polycert/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace polycert::numerics {

namespace {

constexpr double kBetaEps = 1e-15;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b), modified Lentz. Converges for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaEps) return h;
  }
  throw Error("reg_inc_beta: continued fraction did not converge within " +
              std::to_string(kBetaMaxIterations) + " iterations");
}

}  // namespace

ConfidenceLevel::ConfidenceLevel(double level) : level_(level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ArgumentError("confidence level must lie in (0, 1), got " + std::to_string(level));
  }
}

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("reg_inc_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("inv_norm_cdf: p must lie in (0, 1)");
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  const double e = norm_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double clopper_pearson_lower(std::int64_t successes, std::int64_t trials, ConfidenceLevel conf) {
  if (trials < 1) throw ArgumentError("clopper_pearson_lower: trials must be >= 1");
  if (successes < 0 || successes > trials) {
    throw ArgumentError("clopper_pearson_lower: successes must lie in [0, trials]");
  }
  if (successes == 0) return 0.0;
  const double alpha = 1.0 - conf.value();
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  // P[Bin(n,p) >= k] = I_p(k, n-k+1), increasing in p.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reg_inc_beta(mid, k, n - k + 1.0) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec Rng::gaussian(Eigen::Index dim, double sigma) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = sigma * normal();
  return v;
}

Vec Rng::unit_vector(Eigen::Index dim) {
  Vec v = gaussian(dim, 1.0);
  double nrm = v.norm();
  while (nrm == 0.0) {
    v = gaussian(dim, 1.0);
    nrm = v.norm();
  }
  return v / nrm;
}

Vec gaussian_sample(std::uint64_t seed, Eigen::Index dim, double sigma) {
  if (dim < 1) throw ArgumentError("gaussian_sample: dim must be >= 1");
  if (!(sigma > 0.0)) throw ArgumentError("gaussian_sample: sigma must be positive");
  Rng rng(seed);
  return rng.gaussian(dim, sigma);
}

}  // namespace polycert::numerics

#pragma once

#include <string>
#include <vector>

#include "polycert/common.hpp"
#include "polycert/data.hpp"

namespace polycert::bpdn {

inline constexpr double kDefaultTol = 1e-8;
inline constexpr int kDefaultMaxSweeps = 100000;
inline constexpr double kDefaultTau = 1e-6;

struct SolverOptions {
  /// Stop once gap <= tol * max(1, |primal|).
  double tol = kDefaultTol;
  /// Cap on full coordinate sweeps.
  int max_sweeps = kDefaultMaxSweeps;
  /// Try an exact solve on the current support and signs after each sweep.
  bool polish = true;
};

/// Solution of min_c ||c||_1 + (lambda/2) ||x - S c||^2 and its dual
/// max_d <x, d> - ||d||^2 / (2 lambda) s.t. ||S^T d||_inf <= 1.
///
/// c is not unique when S is overcomplete; d = Proj_{K°}(lambda x) is.
struct DualSolution {
  Vec x;
  double lambda = 0.0;
  Vec c;
  Vec e;  // x - S c
  Vec d;  // lambda * e
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool polished = false;
};

/// The solver hit its sweep cap. Carries the best iterate seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, DualSolution best);
  const DualSolution& best() const noexcept { return best_; }
  double gap() const noexcept { return best_.gap; }

 private:
  DualSolution best_;
};

/// Cyclic coordinate descent with duality-gap stopping.
DualSolution solve(const Mat& atoms, const Vec& x, double lambda, const SolverOptions& opts = {});
DualSolution solve(const data::Dictionary& dict, const Vec& x, double lambda, const SolverOptions& opts = {});

struct GapReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

/// Recomputes both objectives from the stored c, e, d.
GapReport duality_gap_report(const DualSolution& sol);

/// Largest KKT violations: feasibility max(0, ||S^T d||_inf - 1) and, over the
/// support of c, |sign(c_i) <s_i, d> - 1|.
struct KktReport {
  double feasibility = 0.0;
  double stationarity = 0.0;
};
KktReport check_kkt(const Mat& atoms, const DualSolution& sol);

/// Signed dictionary column: +s_index or -s_index.
struct ActiveEntry {
  Eigen::Index index = 0;
  int sign = 1;

  friend bool operator==(const ActiveEntry&, const ActiveEntry&) = default;
  friend auto operator<=>(const ActiveEntry&, const ActiveEntry&) = default;
};

/// {(i, s) : s <s_i, d> >= 1 - tau}, sorted by index.
struct ActiveSet {
  std::vector<ActiveEntry> entries;
  double tau = kDefaultTau;
  /// Some activity |<s_j, d>| falls in [1 - 10 tau, 1 - tau / 10): the
  /// set could change under a perturbation of order tau.
  bool near_degenerate = false;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  bool same_entries(const ActiveSet& other) const { return entries == other.entries; }
};

ActiveSet active_set(const Mat& atoms, const DualSolution& sol, double tau = kDefaultTau);
ActiveSet active_set(const data::Dictionary& dict, const DualSolution& sol, double tau = kDefaultTau);

}  // namespace polycert::bpdn

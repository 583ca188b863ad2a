#include "polycert/bpdn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace polycert::bpdn {

namespace {

constexpr int kMaxInnerPasses = 100;
constexpr double kInnerStop = 1e-12;
constexpr double kPolishFeasibility = 1e-10;
// Sweeps spent after convergence looking for an exact support solve.
constexpr int kExtraSweeps = 20;

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

bool gap_ok(const DualSolution& s, double tol) {
  return s.gap <= tol * std::max(1.0, std::abs(s.primal_value));
}

// Fills e, d and the objectives from c and the residual r = x - S c.
void evaluate(const Mat& atoms, DualSolution& s, const Vec& r) {
  s.e = r;
  Vec d = s.lambda * r;
  const double worst = d.size() > 0 && atoms.cols() > 0 ? (atoms.transpose() * d).cwiseAbs().maxCoeff() : 0.0;
  if (worst > 1.0) d /= worst;
  s.d = std::move(d);
  s.primal_value = s.c.lpNorm<1>() + 0.5 * s.lambda * r.squaredNorm();
  s.dual_value = s.x.dot(s.d) - s.d.squaredNorm() / (2.0 * s.lambda);
  s.gap = s.primal_value - s.dual_value;
}

// Exact solution on a fixed support with fixed signs: S_A^T (x - S_A c_A) = sign / lambda.
// Entries whose coefficient comes out with the wrong sign are dropped one at a
// time. Returns false when no sign-consistent, dual-feasible candidate remains.
bool polish(const Mat& atoms, std::vector<ActiveEntry> cand, DualSolution& s) {
  while (!cand.empty()) {
    const auto k = static_cast<Eigen::Index>(cand.size());
    Mat a(atoms.rows(), k);
    Vec sigma(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      a.col(j) = atoms.col(cand[static_cast<std::size_t>(j)].index);
      sigma[j] = cand[static_cast<std::size_t>(j)].sign;
    }
    const Mat gram = a.transpose() * a;
    const Vec rhs = a.transpose() * s.x - sigma / s.lambda;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(gram);
    const Vec coef = cod.solve(rhs);
    if ((gram * coef - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) return false;
    Eigen::Index worst = -1;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (sigma[j] * coef[j] < 0.0 && (worst < 0 || sigma[j] * coef[j] < sigma[worst] * coef[worst])) worst = j;
    }
    if (worst >= 0) {
      cand.erase(cand.begin() + worst);
      continue;
    }
    const Vec r = s.x - a * coef;
    if (s.lambda * (atoms.transpose() * r).cwiseAbs().maxCoeff() > 1.0 + kPolishFeasibility) return false;
    s.c.setZero();
    for (Eigen::Index j = 0; j < k; ++j) s.c[cand[static_cast<std::size_t>(j)].index] = coef[j];
    evaluate(atoms, s, r);
    s.polished = true;
    return true;
  }
  return false;
}

// Support of c plus every column whose activity is within `band` of 1.
std::vector<ActiveEntry> widened_support(const Mat& atoms, const DualSolution& s, double band) {
  std::vector<ActiveEntry> out;
  const Vec act = atoms.transpose() * s.d;
  for (Eigen::Index i = 0; i < act.size(); ++i) {
    if (s.c[i] != 0.0) {
      out.push_back({i, s.c[i] > 0 ? 1 : -1});
    } else if (std::abs(act[i]) >= 1.0 - band) {
      out.push_back({i, act[i] > 0 ? 1 : -1});
    }
  }
  return out;
}

}  // namespace

ConvergenceError::ConvergenceError(const std::string& what, DualSolution best)
    : Error(what + " (best gap " + std::to_string(best.gap) + ")"), best_(std::move(best)) {}

DualSolution solve(const Mat& atoms, const Vec& x, double lambda, const SolverOptions& opts) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("bpdn::solve: lambda must be positive");
  if (x.size() != atoms.rows()) throw ArgumentError("bpdn::solve: x dimension does not match dictionary");
  if (!x.allFinite()) throw ArgumentError("bpdn::solve: x has non-finite entries");
  if (!(opts.tol > 0.0)) throw ArgumentError("bpdn::solve: tol must be positive");
  if (opts.max_sweeps < 1) throw ArgumentError("bpdn::solve: max_sweeps must be >= 1");

  const Eigen::Index m = atoms.cols();
  const Vec norms2 = atoms.colwise().squaredNorm().transpose();

  DualSolution s;
  s.x = x;
  s.lambda = lambda;
  s.c = Vec::Zero(m);
  Vec r = x;
  evaluate(atoms, s, r);
  if (gap_ok(s, opts.tol)) return s;

  DualSolution best = s;
  std::vector<Eigen::Index> support;
  std::vector<ActiveEntry> last_tried;
  int extra = 0;

  auto update = [&](Eigen::Index i) {
    const double n2 = norms2[i];
    if (n2 == 0.0) return 0.0;
    const double z = s.c[i] + atoms.col(i).dot(r) / n2;
    const double next = soft_threshold(z, 1.0 / (lambda * n2));
    const double delta = next - s.c[i];
    if (delta != 0.0) {
      r.noalias() -= delta * atoms.col(i);
      s.c[i] = next;
    }
    return std::abs(delta);
  };

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < m; ++i) update(i);

    support.clear();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (s.c[i] != 0.0) support.push_back(i);
    }
    for (int pass = 0; pass < kMaxInnerPasses && !support.empty(); ++pass) {
      double moved = 0.0;
      for (Eigen::Index i : support) moved = std::max(moved, update(i));
      if (moved < kInnerStop) break;
    }

    // Re-anchor the residual to limit drift from incremental updates.
    r = x - atoms * s.c;
    s.iterations = sweep;
    s.polished = false;
    evaluate(atoms, s, r);
    if (s.gap < best.gap) best = s;
    const bool converged = gap_ok(s, opts.tol);

    // A small gap pins d only to about sqrt(gap / lambda); the support solve
    // recovers it to machine precision when the support is right.
    if (opts.polish) {
      std::vector<ActiveEntry> cand;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (s.c[i] != 0.0) cand.push_back({i, s.c[i] > 0 ? 1 : -1});
      }
      if (!cand.empty() && cand != last_tried) {
        last_tried = cand;
        DualSolution trial = s;
        if (polish(atoms, cand, trial) && gap_ok(trial, opts.tol)) return trial;
      }
      if (converged) {
        for (double band : {1e-6, 1e-4, 1e-2}) {
          DualSolution trial = s;
          if (polish(atoms, widened_support(atoms, s, band), trial) && gap_ok(trial, opts.tol)) return trial;
        }
      }
    }
    if (converged && (!opts.polish || ++extra > kExtraSweeps)) return s;
  }
  throw ConvergenceError("bpdn::solve: sweep cap " + std::to_string(opts.max_sweeps) + " reached", best);
}

DualSolution solve(const data::Dictionary& dict, const Vec& x, double lambda, const SolverOptions& opts) {
  return solve(dict.atoms(), x, lambda, opts);
}

GapReport duality_gap_report(const DualSolution& sol) {
  GapReport g;
  g.primal = sol.c.lpNorm<1>() + 0.5 * sol.lambda * sol.e.squaredNorm();
  g.dual = sol.x.dot(sol.d) - sol.d.squaredNorm() / (2.0 * sol.lambda);
  g.gap = g.primal - g.dual;
  return g;
}

KktReport check_kkt(const Mat& atoms, const DualSolution& sol) {
  KktReport k;
  if (atoms.cols() == 0) return k;
  const Vec a = atoms.transpose() * sol.d;
  k.feasibility = std::max(0.0, a.cwiseAbs().maxCoeff() - 1.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (sol.c[i] == 0.0) continue;
    const double s = sol.c[i] > 0 ? 1.0 : -1.0;
    k.stationarity = std::max(k.stationarity, std::abs(s * a[i] - 1.0));
  }
  return k;
}

ActiveSet active_set(const Mat& atoms, const DualSolution& sol, double tau) {
  if (!(tau > 0.0) || tau >= 1.0) throw ArgumentError("active_set: tau must lie in (0, 1)");
  if (sol.d.size() != atoms.rows()) throw ArgumentError("active_set: solution does not match dictionary");
  ActiveSet out;
  out.tau = tau;
  const Vec a = atoms.transpose() * sol.d;
  const double threshold = 1.0 - tau;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double mag = std::abs(a[i]);
    if (mag >= threshold) out.entries.push_back({i, a[i] > 0 ? 1 : -1});
    if (mag >= 1.0 - 10.0 * tau && mag < 1.0 - 0.1 * tau) out.near_degenerate = true;
  }
  return out;
}

ActiveSet active_set(const data::Dictionary& dict, const DualSolution& sol, double tau) {
  return active_set(dict.atoms(), sol, tau);
}

}  // namespace polycert::bpdn

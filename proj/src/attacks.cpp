#include "polycert/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "polycert/classifier.hpp"
#include "polycert/numerics.hpp"

namespace polycert::attacks {

namespace {

Vec ball_project(const Vec& x, const Vec& z, double eps) {
  const Vec delta = z - x;
  const double nrm = delta.norm();
  if (nrm <= eps) return z;
  return x + delta * (eps / nrm);
}

bool adversarial(const std::function<Label(const Vec&)>& predict, const Vec& z, Label y) {
  return predict(z) != y;
}

// Smallest-norm adversarial point on the segment [x, hi] (hi adversarial).
Vec binary_search(const std::function<Label(const Vec&)>& predict, const Vec& x, const Vec& hi_start, Label y,
                  double tol) {
  double lo = 0.0;
  double hi = 1.0;
  const Vec dir = hi_start - x;
  const double len = dir.norm();
  while ((hi - lo) * len > tol) {
    const double mid = 0.5 * (lo + hi);
    if (adversarial(predict, x + mid * dir, y)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return x + hi * dir;
}

}  // namespace

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ArgumentError("attack: epsilon must be >= 0");
  if (steps < 1) throw ArgumentError("attack: steps must be >= 1");
  if (!(step_size >= 0.0)) throw ArgumentError("attack: step size must be >= 0");
}

AttackResult pgd_in_certificate(const AttackTarget& target, const Vec& x, Label y,
                                const certificate::CertificatePolyhedron& cert, const AttackConfig& cfg,
                                const PgdOptions& opts) {
  cfg.validate();
  if (!target.predict || !target.loss_gradient) throw ArgumentError("pgd_in_certificate: target needs scores");
  if (x.size() != cert.anchor().size()) throw ArgumentError("pgd_in_certificate: dimension mismatch");
  const double lambda = cert.lambda();

  double margin = 0.0;
  if (opts.face_margin > 0.0) {
    const auto anchor = certificate::project_lambda(cert, lambda * x);
    margin = std::min(opts.face_margin, 0.5 * std::max(0.0, anchor.activity_slack));
  }
  auto proj_c = [&](const Vec& z) { return Vec(certificate::project_lambda(cert, lambda * z, margin).point / lambda); };

  AttackResult out;
  Vec cur = x;
  for (int t = 1; t <= cfg.steps; ++t) {
    Vec z = cur;
    if (cfg.step_size > 0.0) {
      const Vec g = target.loss_gradient(cur, y);
      const double gn = g.norm();
      if (gn > 0.0 && std::isfinite(gn)) z = cur + (cfg.step_size / gn) * g;
    }
    z = ball_project(x, z, cfg.epsilon);
    for (int a = 0; a < opts.max_alternations; ++a) {
      z = proj_c(z);
      if ((z - x).norm() <= cfg.epsilon) break;
      z = ball_project(x, z, cfg.epsilon);
    }
    // x lies in C and C is convex, so pulling z back toward x keeps it in C.
    const double dist = (z - x).norm();
    if (dist > cfg.epsilon) z = x + (z - x) * (cfg.epsilon / dist);

    cur = z;
    AttackStep step;
    step.step = t;
    step.l2 = (cur - x).norm();
    step.label = target.predict(cur);
    step.in_certificate = certificate::contains(cert, cur);
    out.transcript.push_back(step);
    if (step.label != y) {
      out.success = true;
      break;
    }
  }
  out.adversarial_x = cur;
  out.final_l2 = (cur - x).norm();
  out.in_certificate = out.transcript.empty() ? true : out.transcript.back().in_certificate;
  return out;
}

AttackResult boundary_attack(const std::function<Label(const Vec&)>& predict, const Vec& x, Label y,
                             const AttackConfig& cfg, const BoundaryOptions& opts) {
  cfg.validate();
  AttackResult out;
  out.adversarial_x = x;
  if (adversarial(predict, x, y)) {
    out.success = true;
    return out;
  }
  numerics::Rng rng(cfg.seed);
  const Eigen::Index n = x.size();
  const double scale = std::max(1.0, x.norm());

  Vec start;
  bool found = false;
  for (int trial = 0; trial < opts.init_trials && !found; ++trial) {
    // Radii sweep geometrically from 0.01 to 10 times the input scale.
    const double frac = static_cast<double>(trial % 20) / 19.0;
    const double radius = scale * 0.01 * std::pow(1000.0, frac);
    const Vec cand = x + radius * rng.unit_vector(n);
    if (adversarial(predict, cand, y)) {
      start = cand;
      found = true;
    }
  }
  if (!found) return out;

  Vec best = binary_search(predict, x, start, y, opts.binary_tol);
  double best_norm = (best - x).norm();
  AttackStep init;
  init.step = 0;
  init.l2 = best_norm;
  init.label = predict(best);
  out.transcript.push_back(init);

  Vec boundary = best;
  for (int t = 1; t <= cfg.steps; ++t) {
    const double dist = (boundary - x).norm();
    if (dist <= opts.binary_tol) break;
    const double delta = std::max(opts.binary_tol, 0.01 * dist);
    Vec grad = Vec::Zero(n);
    std::vector<Vec> dirs;
    std::vector<double> signs;
    double mean_sign = 0.0;
    for (int p = 0; p < opts.probes; ++p) {
      Vec u = rng.unit_vector(n);
      const double s = adversarial(predict, boundary + delta * u, y) ? 1.0 : -1.0;
      mean_sign += s;
      dirs.push_back(std::move(u));
      signs.push_back(s);
    }
    mean_sign /= opts.probes;
    for (int p = 0; p < opts.probes; ++p) grad += (signs[static_cast<std::size_t>(p)] - mean_sign) * dirs[static_cast<std::size_t>(p)];
    if (grad.norm() == 0.0) {
      for (int p = 0; p < opts.probes; ++p) grad += signs[static_cast<std::size_t>(p)] * dirs[static_cast<std::size_t>(p)];
    }
    if (grad.norm() == 0.0) continue;
    grad.normalize();

    double step = dist / std::sqrt(static_cast<double>(t));
    Vec cand;
    bool ok = false;
    for (int h = 0; h < 20; ++h) {
      cand = boundary + step * grad;
      if (adversarial(predict, cand, y)) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) continue;
    boundary = binary_search(predict, x, cand, y, opts.binary_tol);
    const double norm = (boundary - x).norm();
    if (norm < best_norm) {
      best = boundary;
      best_norm = norm;
    }
    AttackStep rec;
    rec.step = t;
    rec.l2 = best_norm;
    rec.label = predict(best);
    out.transcript.push_back(rec);
  }
  out.success = true;
  out.adversarial_x = best;
  out.final_l2 = best_norm;
  return out;
}

double estimate_robust_risk(const std::function<Label(const Vec&)>& predict, const data::LabeledDataset& dataset,
                            const AttackFn& attack, double epsilon) {
  if (dataset.empty()) throw ArgumentError("estimate_robust_risk: empty dataset");
  if (!(epsilon >= 0.0)) throw ArgumentError("estimate_robust_risk: epsilon must be >= 0");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Vec& x = dataset.points[i];
    const Label y = dataset.labels[i];
    if (predict(x) != y) {
      ++bad;
      continue;
    }
    const AttackResult r = attack(x, y);
    if (r.success && r.final_l2 <= epsilon + 1e-12 && predict(r.adversarial_x) != y) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(dataset.size());
}

Vec margin_loss_gradient(const data::SubspaceModel& model, const Vec& x, Label y) {
  const Vec s = classifier::score_nearest_subspace(model, x);
  int other = -1;
  for (int k = 0; k < model.num_classes(); ++k) {
    if (k == y) continue;
    if (other < 0 || s[k] > s[other]) other = k;
  }
  if (other < 0) return Vec::Zero(x.size());
  return classifier::score_gradient(model, x, other) - classifier::score_gradient(model, x, y);
}

Vec soft_vote_gradient(const data::SubspaceModel& model, const Vec& x, Label y, double sigma, int samples,
                       std::uint64_t seed) {
  if (samples < 1) throw ArgumentError("soft_vote_gradient: samples must be >= 1");
  Vec g = Vec::Zero(x.size());
  for (int i = 0; i < samples; ++i) {
    const Vec noise = numerics::gaussian_sample(numerics::derive_seed(seed, static_cast<std::uint64_t>(i)), x.size(), sigma);
    g += margin_loss_gradient(model, x + noise, y);
  }
  return g / samples;
}

}  // namespace polycert::attacks

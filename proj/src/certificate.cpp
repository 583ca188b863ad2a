#include "polycert/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace polycert::certificate {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kZeroNormal = 1e-10;
constexpr int kHildrethBlock = 25;
constexpr double kDedupTol = 1e-9;

Eigen::ColPivHouseholderQR<Mat> range_qr(const Mat& gens) {
  Eigen::ColPivHouseholderQR<Mat> qr(gens);
  qr.setThreshold(kRankThreshold);
  return qr;
}

double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// Inward unit normals (in range coordinates) of the facets of cone(B), B r x k
// with rank r.
std::vector<Vec> cone_facets(const Mat& b) {
  const Eigen::Index r = b.rows();
  const Eigen::Index k = b.cols();
  std::vector<Vec> out;
  if (k == r) {
    const Mat inv = b.inverse();
    for (Eigen::Index i = 0; i < r; ++i) out.emplace_back(inv.row(i).transpose().normalized());
    return out;
  }
  if (log_binomial(static_cast<double>(k), static_cast<double>(r - 1)) > std::log(1e6)) {
    throw SizeError("cone facet enumeration: too many generator subsets");
  }
  auto consider = [&](Vec nu) {
    const Vec s = nu.transpose() * b;
    if (s.minCoeff() < -1e-10) {
      if (s.maxCoeff() > 1e-10) return;
      nu = -nu;
    }
    for (const Vec& v : out) {
      if ((v - nu).norm() < kDedupTol) return;
    }
    out.push_back(std::move(nu));
  };
  if (r == 1) {
    consider(Vec::Ones(1));
    return out;
  }
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(r - 1));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index depth, Eigen::Index start) {
    if (depth == r - 1) {
      Mat sub(r - 1, r);
      for (Eigen::Index j = 0; j < r - 1; ++j) sub.row(j) = b.col(pick[static_cast<std::size_t>(j)]).transpose();
      Eigen::FullPivLU<Mat> lu(sub);
      lu.setThreshold(kRankThreshold);
      if (lu.rank() != r - 1) return;
      consider(Vec(lu.kernel().col(0)).normalized());
      return;
    }
    for (Eigen::Index i = start; i < k; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
  return out;
}

// Projection of p (in N) onto {w : <g_j, w> <= h_j - margin}: Hildreth's
// dual coordinate ascent on a growing working set, finished by an exact solve
// of the equality system on the constraints with positive multipliers.
Vec project_face(const CertificatePolyhedron& cert, const Vec& p, double margin, int cap, int& iterations) {
  const double scale = std::max(1.0, p.norm());
  const double feas_tol = 1e-12 * scale;
  const Eigen::Index m = cert.dictionary().size();

  Vec values;
  double worst = cert.max_violation(p, margin, &values);
  if (worst <= feas_tol) return p;

  std::vector<Eigen::Index> ids;
  std::vector<Vec> normals;
  std::vector<double> norm2;
  std::vector<double> rhs;
  std::vector<double> mu;
  std::vector<char> in_set(static_cast<std::size_t>(2 * m), 0);
  auto add_violated = [&]() {
    bool added = false;
    for (Eigen::Index id = 0; id < 2 * m; ++id) {
      if (values[id] > feas_tol && !in_set[static_cast<std::size_t>(id)]) {
        in_set[static_cast<std::size_t>(id)] = 1;
        ids.push_back(id);
        normals.push_back(cert.face_normal(id));
        norm2.push_back(normals.back().squaredNorm());
        rhs.push_back(cert.offset(id) - margin);
        mu.push_back(0.0);
        added = true;
      }
    }
    return added;
  };
  add_violated();

  Vec w = p;
  for (;;) {
    double step = 0.0;
    for (int pass = 0; pass < kHildrethBlock; ++pass) {
      step = 0.0;
      for (std::size_t q = 0; q < ids.size(); ++q) {
        const double viol = normals[q].dot(w) - rhs[q];
        const double next = std::max(0.0, mu[q] + viol / norm2[q]);
        const double delta = next - mu[q];
        if (delta != 0.0) {
          w.noalias() -= delta * normals[q];
          mu[q] = next;
          step = std::max(step, std::abs(delta) * std::sqrt(norm2[q]));
        }
      }
      if (++iterations > cap) throw ProjectionError("certificate projection: iteration cap reached", worst);
      if (step < 1e-14 * scale) break;
    }

    std::vector<std::size_t> pos;
    for (std::size_t q = 0; q < ids.size(); ++q) {
      if (mu[q] > 0.0) pos.push_back(q);
    }
    if (!pos.empty()) {
      const auto k = static_cast<Eigen::Index>(pos.size());
      Mat g(p.size(), k);
      Vec h(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        g.col(j) = normals[pos[static_cast<std::size_t>(j)]];
        h[j] = rhs[pos[static_cast<std::size_t>(j)]];
      }
      const Mat gram = g.transpose() * g;
      const Vec b = g.transpose() * p - h;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(gram);
      const Vec exact_mu = cod.solve(b);
      if ((gram * exact_mu - b).norm() <= 1e-10 * std::max(1.0, b.norm()) && exact_mu.minCoeff() >= 0.0) {
        Vec candidate = p - g * exact_mu;
        Vec cvals;
        if (cert.max_violation(candidate, margin, &cvals) <= feas_tol) return candidate;
      }
    }

    worst = cert.max_violation(w, margin, &values);
    const bool added = add_violated();
    if (!added && step < 1e-14 * scale) return w;
  }
}

}  // namespace

CertificatePolyhedron::CertificatePolyhedron(std::shared_ptr<const data::Dictionary> dict,
                                             const bpdn::DualSolution& sol, const bpdn::ActiveSet& active)
    : dict_(std::move(dict)), anchor_(sol.x), lambda_(sol.lambda), active_(active), dual_point_(sol.d) {
  if (!dict_) throw ArgumentError("certificate: null dictionary");
  const Eigen::Index m = dict_->size();
  const Eigen::Index n = dict_->dim();
  if (sol.d.size() != n || sol.x.size() != n) throw ArgumentError("certificate: solution does not match dictionary");
  if (active_.empty()) throw CertificateError("certificate undefined: empty active set (lambda x is interior to K°)");

  active_sign_.assign(static_cast<std::size_t>(m), 0);
  gens_.resize(n, static_cast<Eigen::Index>(active_.size()));
  for (std::size_t q = 0; q < active_.size(); ++q) {
    const auto& e = active_.entries[q];
    if (e.index < 0 || e.index >= m || (e.sign != 1 && e.sign != -1)) {
      throw ArgumentError("certificate: malformed active entry");
    }
    int& slot = active_sign_[static_cast<std::size_t>(e.index)];
    if (slot != 0 && slot != e.sign) {
      throw CertificateError("certificate: active set holds both +s and -s for column " + std::to_string(e.index));
    }
    slot = e.sign;
    gens_.col(static_cast<Eigen::Index>(q)) = e.sign * dict_->atoms().col(e.index);
  }

  const auto qr = range_qr(gens_);
  const Eigen::Index r = qr.rank();
  q_range_ = qr.householderQ() * Mat::Identity(n, r);

  const Mat b = q_range_.transpose() * gens_;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(b.transpose());
  const Vec ones = Vec::Ones(gens_.cols());
  const Vec z = cod.solve(ones);
  if ((b.transpose() * z - ones).cwiseAbs().maxCoeff() > 1e-8) {
    throw CertificateError("certificate: active equalities <t, d> = 1 are inconsistent");
  }
  f0_ = q_range_ * z;

  range_coef_ = q_range_.transpose() * dict_->atoms();
  s_dot_f0_ = dict_->atoms().transpose() * f0_;
  perp_norm_.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double v = dict_->atoms().col(j).squaredNorm() - range_coef_.col(j).squaredNorm();
    perp_norm_[j] = std::sqrt(std::max(0.0, v));
  }
  for (Eigen::Index id = 0; id < 2 * m; ++id) {
    const Eigen::Index j = id < m ? id : id - m;
    const int sign = id < m ? 1 : -1;
    if (active_sign_[static_cast<std::size_t>(j)] != sign) inactive_.push_back(id);
  }
}

Mat CertificatePolyhedron::inequality_normals() const {
  const Eigen::Index m = dict_->size();
  Mat out(static_cast<Eigen::Index>(inactive_.size()), dict_->dim());
  for (std::size_t q = 0; q < inactive_.size(); ++q) {
    const Eigen::Index id = inactive_[q];
    const Eigen::Index j = id < m ? id : id - m;
    out.row(static_cast<Eigen::Index>(q)) = (id < m ? 1.0 : -1.0) * dict_->atoms().col(j).transpose();
  }
  return out;
}

double CertificatePolyhedron::offset(Eigen::Index id) const {
  const Eigen::Index m = dict_->size();
  return id < m ? 1.0 - s_dot_f0_[id] : 1.0 + s_dot_f0_[id - m];
}

double CertificatePolyhedron::normal_norm(Eigen::Index id) const {
  const Eigen::Index m = dict_->size();
  return perp_norm_[id < m ? id : id - m];
}

Vec CertificatePolyhedron::face_normal(Eigen::Index id) const {
  const Eigen::Index m = dict_->size();
  const Eigen::Index j = id < m ? id : id - m;
  Vec g = dict_->atoms().col(j) - q_range_ * range_coef_.col(j);
  if (id >= m) g = -g;
  return g;
}

Vec CertificatePolyhedron::project_to_complement(const Vec& v) const {
  return v - q_range_ * (q_range_.transpose() * v);
}

double CertificatePolyhedron::max_violation(const Vec& w, double margin, Vec* values) const {
  const Eigen::Index m = dict_->size();
  const Vec a = dict_->atoms().transpose() * w;
  double worst = -std::numeric_limits<double>::infinity();
  if (values != nullptr) values->setConstant(2 * m, -std::numeric_limits<double>::infinity());
  for (Eigen::Index id : inactive_) {
    const Eigen::Index j = id < m ? id : id - m;
    if (perp_norm_[j] < kZeroNormal) continue;
    const double v = (id < m ? a[j] : -a[j]) - offset(id) + margin;
    if (values != nullptr) (*values)[id] = v;
    worst = std::max(worst, v);
  }
  return worst;
}

CertificatePolyhedron build_certificate(std::shared_ptr<const data::Dictionary> dict, const bpdn::DualSolution& sol,
                                        const bpdn::ActiveSet& active) {
  return CertificatePolyhedron(std::move(dict), sol, active);
}

Vec nnls(const Mat& a, const Vec& b, int max_iterations) {
  const Eigen::Index k = a.cols();
  if (b.size() != a.rows()) throw ArgumentError("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * k + 30);
  Vec x = Vec::Zero(k);
  if (k == 0) return x;
  const double tol = 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.norm());
  std::vector<char> passive(static_cast<std::size_t>(k), 0);

  auto solve_passive = [&](Vec& s) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Mat sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t q = 0; q < cols.size(); ++q) sub.col(static_cast<Eigen::Index>(q)) = a.col(cols[q]);
    const Vec z = sub.colPivHouseholderQr().solve(b);
    s.setZero(k);
    for (std::size_t q = 0; q < cols.size(); ++q) s[cols[q]] = z[static_cast<Eigen::Index>(q)];
  };

  Vec grad = a.transpose() * (b - a * x);
  for (int outer = 0; outer < max_iterations; ++outer) {
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    }
    if (best < 0) return x;
    passive[static_cast<std::size_t>(best)] = 1;
    Vec s;
    for (int inner = 0; inner <= k; ++inner) {
      solve_passive(s);
      double alpha = 1.0;
      bool clipped = false;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          const double denom = x[j] - s[j];
          const double t = denom > 0.0 ? x[j] / denom : 0.0;
          if (t < alpha) alpha = t;
          clipped = true;
        }
      }
      if (!clipped) break;
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = 0;
          x[j] = 0.0;
        }
      }
    }
    x = s;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)]) x[j] = 0.0;
    }
    grad = a.transpose() * (b - a * x);
  }
  return x;
}

ProjectionResult project_lambda(const CertificatePolyhedron& cert, const Vec& y, double margin, int max_iterations) {
  if (y.size() != cert.anchor().size()) throw ArgumentError("project_lambda: dimension mismatch");
  if (!(margin >= 0.0)) throw ArgumentError("project_lambda: margin must be >= 0");
  ProjectionResult out;
  const Vec p = cert.project_to_complement(y);
  out.w = project_face(cert, p, margin, max_iterations, out.iterations);

  const Mat& q = cert.range_basis();
  const Mat b = q.transpose() * cert.cone_generators();
  out.alpha = nnls(b, q.transpose() * (y - cert.face_point()));
  out.point = cert.face_point() + out.w + cert.cone_generators() * out.alpha;
  out.distance = (y - out.point).norm();

  const Eigen::Index m = cert.dictionary().size();
  Vec values;
  cert.max_violation(out.w, 0.0, &values);
  for (Eigen::Index id = 0; id < 2 * m; ++id) {
    if (!std::isfinite(values[id])) continue;
    out.face_slack = std::min(out.face_slack, -values[id] / cert.normal_norm(id));
    out.activity_slack = std::min(out.activity_slack, -values[id]);
  }
  return out;
}

Vec project_onto(const CertificatePolyhedron& cert, const Vec& y, double tol) {
  const ProjectionResult r = project_lambda(cert, cert.lambda() * y);
  if (r.face_slack < -tol) throw ProjectionError("project_onto: result violates a face constraint", -r.face_slack);
  return r.point / cert.lambda();
}

Membership membership(const CertificatePolyhedron& cert, const Vec& x_prime, double tol) {
  const ProjectionResult r = project_lambda(cert, cert.lambda() * x_prime);
  Membership out;
  out.distance = r.distance;
  out.member = r.distance <= tol;
  const double min_alpha = r.alpha.size() > 0 ? r.alpha.minCoeff() : std::numeric_limits<double>::infinity();
  out.on_boundary = out.member && (r.face_slack <= tol || min_alpha <= tol);
  return out;
}

bool contains(const CertificatePolyhedron& cert, const Vec& x_prime, double tol) {
  return membership(cert, x_prime, tol).member;
}

std::vector<Vec> enumerate_face_vertices(const CertificatePolyhedron& cert, std::size_t max_vertices,
                                         std::size_t candidate_budget) {
  const Eigen::Index n = cert.anchor().size();
  const Eigen::Index p = cert.face_dim();
  if (p == 0) return {cert.face_point()};

  const auto qr = range_qr(cert.cone_generators());
  const Mat q_full = qr.householderQ() * Mat::Identity(n, n);
  const Mat q_null = q_full.rightCols(p);

  const Eigen::Index m = cert.dictionary().size();
  std::vector<Eigen::Index> column;
  std::vector<Vec> rows;
  std::vector<double> rhs;
  for (Eigen::Index id : cert.inactive_ids()) {
    if (cert.normal_norm(id) < kZeroNormal) continue;
    const Eigen::Index j = id < m ? id : id - m;
    rows.emplace_back((id < m ? 1.0 : -1.0) * (q_null.transpose() * cert.dictionary().atoms().col(j)));
    rhs.push_back(cert.offset(id));
    column.push_back(j);
  }
  const auto count = static_cast<Eigen::Index>(rows.size());
  if (count < p) return {};
  if (log_binomial(static_cast<double>(count), static_cast<double>(p)) >
      std::log(static_cast<double>(candidate_budget))) {
    throw SizeError("enumerate_face_vertices: C(" + std::to_string(count) + ", " + std::to_string(p) +
                    ") bases exceed the candidate budget");
  }

  std::vector<Vec> found;
  std::vector<Eigen::Index> pick;
  std::vector<Vec> basis;  // orthonormalized picked rows, for pruning dependent subsets
  std::function<void(Eigen::Index)> rec = [&](Eigen::Index start) {
    if (static_cast<Eigen::Index>(pick.size()) == p) {
      Mat g(p, p);
      Vec h(p);
      for (Eigen::Index i = 0; i < p; ++i) {
        g.row(i) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])].transpose();
        h[i] = rhs[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
      }
      Eigen::FullPivLU<Mat> lu(g);
      if (!lu.isInvertible()) return;
      const Vec z = lu.solve(h);
      if (!z.allFinite()) return;
      for (Eigen::Index i = 0; i < count; ++i) {
        const double v = rows[static_cast<std::size_t>(i)].dot(z);
        if (v > rhs[static_cast<std::size_t>(i)] + 1e-9 * (1.0 + std::abs(rhs[static_cast<std::size_t>(i)]))) return;
      }
      for (const Vec& v : found) {
        if ((v - z).cwiseAbs().maxCoeff() <= kDedupTol) return;
      }
      if (found.size() >= max_vertices) {
        throw SizeError("enumerate_face_vertices: more than " + std::to_string(max_vertices) + " vertices");
      }
      found.push_back(z);
      return;
    }
    const Eigen::Index need = p - static_cast<Eigen::Index>(pick.size());
    for (Eigen::Index i = start; i + need <= count; ++i) {
      const Eigen::Index col = column[static_cast<std::size_t>(i)];
      bool clash = false;
      for (Eigen::Index q : pick) clash = clash || column[static_cast<std::size_t>(q)] == col;
      if (clash) continue;
      Vec v = rows[static_cast<std::size_t>(i)];
      for (const Vec& e : basis) v -= e.dot(v) * e;
      if (v.norm() < 1e-9 * rows[static_cast<std::size_t>(i)].norm()) continue;
      pick.push_back(i);
      basis.push_back(v.normalized());
      rec(i + 1);
      pick.pop_back();
      basis.pop_back();
    }
  };
  rec(0);

  std::vector<Vec> out;
  out.reserve(found.size());
  for (const Vec& z : found) out.emplace_back(cert.face_point() + q_null * z);
  return out;
}

ExactRadiusResult exact_l2_radius(const CertificatePolyhedron& cert, std::size_t max_vertices) {
  ExactRadiusResult out;
  out.vertex_count = enumerate_face_vertices(cert, max_vertices).size();

  const double lambda = cert.lambda();
  const Vec y = lambda * cert.anchor();
  const Eigen::Index m = cert.dictionary().size();
  double best = std::numeric_limits<double>::infinity();

  Vec values;
  cert.max_violation(cert.project_to_complement(y), 0.0, &values);
  for (Eigen::Index id = 0; id < 2 * m; ++id) {
    if (!std::isfinite(values[id])) continue;
    const double g = cert.normal_norm(id);
    const double dist = -values[id] / g;
    if (dist < best) {
      best = dist;
      out.witness_u = cert.face_normal(id) / g;
      out.support = cert.offset(id) / g;
      out.cone_facet = false;
    }
  }

  const Mat& q = cert.range_basis();
  const Mat b = q.transpose() * cert.cone_generators();
  const Vec z = q.transpose() * (y - cert.face_point());
  const Vec f0r = q.transpose() * cert.face_point();
  for (const Vec& nu : cone_facets(b)) {
    const double dist = nu.dot(z);
    if (dist < best) {
      best = dist;
      out.witness_u = -(q * nu);
      out.support = -nu.dot(f0r);
      out.cone_facet = true;
    }
  }
  out.r0 = std::isfinite(best) ? std::max(0.0, best) / lambda : best;
  return out;
}

Vec sample_member(const CertificatePolyhedron& cert, const std::vector<Vec>& vertices, numerics::Rng& rng,
                  double max_alpha) {
  if (vertices.empty()) throw ArgumentError("sample_member: no vertices");
  if (!(max_alpha >= 0.0)) throw ArgumentError("sample_member: max_alpha must be >= 0");
  Vec f = Vec::Zero(cert.anchor().size());
  double total = 0.0;
  for (const Vec& v : vertices) {
    const double wgt = -std::log(1.0 - rng.uniform());
    f += wgt * v;
    total += wgt;
  }
  f /= total;
  Vec alpha(cert.cone_generators().cols());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha[i] = max_alpha * rng.uniform();
  return f + cert.cone_generators() * alpha;
}

}  // namespace polycert::certificate

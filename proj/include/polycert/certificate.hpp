#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "polycert/bpdn.hpp"
#include "polycert/common.hpp"
#include "polycert/data.hpp"
#include "polycert/numerics.hpp"

namespace polycert::certificate {

inline constexpr double kDefaultContainsTol = 1e-7;
inline constexpr int kDefaultProjectionCap = 100000;
inline constexpr std::size_t kDefaultMaxVertices = 100000;
inline constexpr std::size_t kDefaultCandidateBudget = 20000000;

/// The certificate cannot be formed (empty or contradictory active set).
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Projection did not reach its residual target.
class ProjectionError : public Error {
 public:
  ProjectionError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// C(x) = F(x) + V(x) in the lambda-scaled geometry, where
///   F = {d : <t, d> = 1 for active t, <t, d> <= 1 otherwise}  (closure)
///   V = cone(active t).
///
/// With R = span(active t) and N its orthogonal complement, the face is
/// f0 + W where f0 in R is the min-norm solution of the equalities and
/// W = {w in N : <t_j, w> <= 1 - <t_j, f0>} over inactive signed columns.
/// Because W lies in N and the cone in R, projecting onto C splits into a
/// polytope projection in N and a nonnegative least-squares fit in R.
class CertificatePolyhedron {
 public:
  CertificatePolyhedron(std::shared_ptr<const data::Dictionary> dict, const bpdn::DualSolution& sol,
                        const bpdn::ActiveSet& active);

  const data::Dictionary& dictionary() const noexcept { return *dict_; }
  const Vec& anchor() const noexcept { return anchor_; }
  double lambda() const noexcept { return lambda_; }
  const bpdn::ActiveSet& active() const noexcept { return active_; }
  /// d* at the anchor.
  const Vec& dual_point() const noexcept { return dual_point_; }

  /// Active signed columns as an n x k matrix (equality normals and cone generators).
  const Mat& cone_generators() const noexcept { return gens_; }
  /// Orthonormal basis of R.
  const Mat& range_basis() const noexcept { return q_range_; }
  /// Min-norm point of the affine hull of F.
  const Vec& face_point() const noexcept { return f0_; }
  Eigen::Index rank() const noexcept { return q_range_.cols(); }
  /// Dimension of F (n - rank).
  Eigen::Index face_dim() const noexcept { return anchor_.size() - rank(); }

  /// Inactive signed columns, as ids in [0, 2M): id < M is +s_id, otherwise -s_{id-M}.
  const std::vector<Eigen::Index>& inactive_ids() const noexcept { return inactive_; }
  /// Inequality normals t_j as rows (one per inactive id). Materialized on demand.
  Mat inequality_normals() const;
  /// Equality normals as rows.
  Mat equality_normals() const { return gens_.transpose(); }

  /// Offset h = 1 - <t, f0> and norm ||P_N t|| for signed column `id`.
  double offset(Eigen::Index id) const;
  double normal_norm(Eigen::Index id) const;
  /// P_N t for signed column `id`.
  Vec face_normal(Eigen::Index id) const;
  /// P_N v.
  Vec project_to_complement(const Vec& v) const;

  /// Max over inactive ids of <t, w> - offset + margin for w in N.
  /// Fills `values` (length 2M, inactive entries only meaningful) when given.
  double max_violation(const Vec& w, double margin, Vec* values = nullptr) const;

 private:
  std::shared_ptr<const data::Dictionary> dict_;
  Vec anchor_;
  double lambda_;
  bpdn::ActiveSet active_;
  Vec dual_point_;
  Mat gens_;
  Mat q_range_;
  Vec f0_;
  Mat range_coef_;    // Q_R^T S
  Vec s_dot_f0_;      // S^T f0
  Vec perp_norm_;     // ||P_N s_j||
  std::vector<int> active_sign_;  // per column: 0, +1, -1
  std::vector<Eigen::Index> inactive_;
};

/// Builds C(x) from a converged solution. Throws CertificateError on an empty
/// active set (lambda x interior to K°) or one holding both +s_i and -s_i.
CertificatePolyhedron build_certificate(std::shared_ptr<const data::Dictionary> dict, const bpdn::DualSolution& sol,
                                        const bpdn::ActiveSet& active);

struct ProjectionResult {
  /// Nearest point of closure(C) (shrunk by `margin` on the face side), lambda-space.
  Vec point;
  /// ||y - point||.
  double distance = 0.0;
  /// Cone coefficients alpha (point = f0 + w + A alpha).
  Vec alpha;
  /// Component in W.
  Vec w;
  /// Smallest face slack (distance of w to the nearest face facet).
  double face_slack = std::numeric_limits<double>::infinity();
  /// Smallest 1 - <t, point> over inactive signed columns t.
  double activity_slack = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Euclidean projection of a lambda-space point onto C. `margin` > 0 projects
/// onto the subset where every inactive signed column has <t, point> <= 1 - margin.
ProjectionResult project_lambda(const CertificatePolyhedron& cert, const Vec& y, double margin = 0.0,
                                int max_iterations = kDefaultProjectionCap);

/// Projection of lambda * y onto C, mapped back to x-space.
Vec project_onto(const CertificatePolyhedron& cert, const Vec& y, double tol = kDefaultContainsTol);

struct Membership {
  bool member = false;
  /// Within tol of a facet of C (membership is decided on the closure).
  bool on_boundary = false;
  double distance = 0.0;
};

Membership membership(const CertificatePolyhedron& cert, const Vec& x_prime, double tol = kDefaultContainsTol);

/// dist(lambda x', closure(C)) <= tol.
bool contains(const CertificatePolyhedron& cert, const Vec& x_prime, double tol = kDefaultContainsTol);

struct ExactRadiusResult {
  /// Largest r with B(anchor, r) inside C, in x-space.
  double r0 = 0.0;
  /// Outward unit normal of the nearest facet.
  Vec witness_u;
  /// Support value: <u, y> <= support on C (lambda-space); r0 = (support - <u, lambda x>) / lambda.
  double support = 0.0;
  /// True when the nearest facet belongs to the cone, false for a facet of F.
  bool cone_facet = false;
  std::size_t vertex_count = 0;
};

/// Exact l2 radius of the largest ball around the anchor inside C, from the
/// facet description of C; also enumerates ext(F) (vertex_count).
ExactRadiusResult exact_l2_radius(const CertificatePolyhedron& cert, std::size_t max_vertices = kDefaultMaxVertices);

/// Extreme points of closure(F) in lambda-space by basis enumeration over the
/// inactive constraints. Throws SizeError beyond `max_vertices` vertices or
/// `candidate_budget` bases.
std::vector<Vec> enumerate_face_vertices(const CertificatePolyhedron& cert,
                                         std::size_t max_vertices = kDefaultMaxVertices,
                                         std::size_t candidate_budget = kDefaultCandidateBudget);

/// f + v with f a random convex combination of `vertices` and v = sum alpha_i t_i,
/// alpha_i ~ U(0, max_alpha). Lambda-space.
Vec sample_member(const CertificatePolyhedron& cert, const std::vector<Vec>& vertices, numerics::Rng& rng,
                  double max_alpha);

/// Nonnegative least squares min ||A a - b||, a >= 0 (Lawson-Hanson).
Vec nnls(const Mat& a, const Vec& b, int max_iterations = 0);

}  // namespace polycert::certificate

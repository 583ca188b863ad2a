// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "cli_util.hpp"
#include "oracles.hpp"
#include "polycert/analytic.hpp"
#include "polycert/attacks.hpp"
#include "polycert/bpdn.hpp"
#include "polycert/certificate.hpp"
#include "polycert/classifier.hpp"
#include "polycert/numerics.hpp"
#include "polycert/smoothing.hpp"
#include "test_util.hpp"

using namespace polycert;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string mnist_dir = POLYCERT_TEST_MNIST_DIR;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Mat random_columns(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat s(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) s(i, j) = g(rng);
    s.col(j).normalize();
  }
  return s;
}

Vec random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (auto& x : v) x = g(rng);
  return v.normalized();
}

std::shared_ptr<const data::Dictionary> labelled(Mat s, int k) {
  std::vector<Label> labels(static_cast<std::size_t>(s.cols()));
  for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = static_cast<Label>(j % static_cast<std::size_t>(k));
  return std::make_shared<const data::Dictionary>(std::move(s), std::move(labels), k);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Outcome optimality() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nd(4, 32), md(8, 128);
  std::uniform_real_distribution<double> ld(0.5, 8.0);
  const auto start = Clock::now();
  int bad = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Mat s = random_columns(nd(rng), md(rng), rng);
    const Vec x = random_unit(s.rows(), rng);
    const double lambda = ld(rng);
    const auto sol = bpdn::solve(s, x, lambda);
    const auto kkt = bpdn::check_kkt(s, sol);
    const double rel = sol.gap / std::max(1.0, std::abs(sol.primal_value));
    worst_gap = std::max(worst_gap, rel);
    const bool ok = rel <= 1e-8 && kkt.feasibility <= 1e-9 && kkt.stationarity <= bpdn::kDefaultTau &&
                    (sol.d - lambda * sol.e).norm() <= 1e-10 && (x - s * sol.c - sol.e).norm() <= 1e-10;
    bad += !ok;
  }
  const double secs = seconds_since(start);
  return {bad == 0 && secs < 60.0,
          "violations " + std::to_string(bad) + "/200, worst relative gap " + fmt(worst_gap) + ", " + fmt(secs) + " s"};
}

Outcome projection() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> nd(1, 3), md(1, 5);
  std::uniform_real_distribution<double> ld(0.5, 8.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Mat s = random_columns(nd(rng), md(rng), rng);
    std::normal_distribution<double> g;
    Vec x(s.rows());
    for (auto& v : x) v = g(rng);
    const double lambda = ld(rng);
    const auto sol = bpdn::solve(s, x, lambda);
    worst = std::max(worst, (sol.d - oracle::project_dual_polytope(s, lambda * x)).norm());
  }
  return {worst <= 1e-6, "max |d* - oracle| " + fmt(worst)};
}

Outcome invariance() {
  std::mt19937_64 rng(103);
  numerics::Rng sampler(104);
  std::uniform_int_distribution<int> nd(2, 8);
  const auto start = Clock::now();
  int instances = 0, total = 0, degenerate = 0, mismatched = 0, label_changes = 0;
  while (instances < 50) {
    const int n = nd(rng);
    std::uniform_int_distribution<int> md(n + 2, 12);
    const auto dict = labelled(random_columns(n, md(rng), rng), 3);
    classifier::DualOptions opts;
    opts.lambda = 3.0;
    const auto base = classifier::predict_dual(dict, random_unit(n, rng), opts);
    if (!base.certificate || base.active.near_degenerate) continue;
    const auto vertices = certificate::enumerate_face_vertices(*base.certificate);
    if (vertices.empty()) continue;
    ++instances;
    for (int i = 0; i < 1000; ++i) {
      const Vec y = certificate::sample_member(*base.certificate, vertices, sampler, 2.0);
      const auto sol = bpdn::solve(*dict, y / opts.lambda, opts.lambda);
      const auto act = bpdn::active_set(*dict, sol, opts.tau);
      const auto pred = classifier::aggregate(*dict, act, opts.rule);
      ++total;
      if (act.near_degenerate) {
        ++degenerate;
        continue;
      }
      mismatched += !act.same_entries(base.active);
      label_changes += pred.label != base.prediction.label;
    }
  }
  const double secs = seconds_since(start);
  const double rate = static_cast<double>(degenerate) / total;
  return {mismatched == 0 && label_changes == 0 && rate < 0.02 && secs < 600.0,
          "samples " + std::to_string(total) + ", active-set mismatches " + std::to_string(mismatched) +
              ", label changes " + std::to_string(label_changes) + ", degenerate " + fmt(100 * rate) + "%, " +
              fmt(secs) + " s"};
}

Outcome attack_inside() {
  const auto model = data::random_subspace_model(2, 20, 3, 0.02, 105);
  const auto train = data::generate_uos(model, 200, 106);
  const auto dict = std::make_shared<const data::Dictionary>(data::build_dictionary(train, 200, 107));
  const auto fitted = data::fit_subspace_model(train, 3);
  const auto test = data::generate_uos(model, 50, 108);
  classifier::DualOptions opts;
  opts.lambda = 2.0;
  int attacked = 0, flips = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = classifier::predict_dual(dict, test.points[i], opts);
    if (p.prediction.label != test.labels[i] || !p.certificate) continue;
    attacks::AttackTarget target;
    target.predict = [&](const Vec& v) { return classifier::predict_dual_label(*dict, v, opts); };
    target.loss_gradient = [&](const Vec& v, Label y) { return attacks::margin_loss_gradient(fitted, v, y); };
    attacks::PgdOptions po;
    po.face_margin = 1e-5;
    for (double eps : {0.25, 1.0, 4.0}) {
      attacks::AttackConfig cfg;
      cfg.epsilon = eps;
      cfg.step_size = 2.5 * eps / cfg.steps;
      cfg.seed = numerics::derive_seed(109, i);
      const auto r = attacks::pgd_in_certificate(target, test.points[i], test.labels[i], *p.certificate, cfg, po);
      bool flipped = r.success;
      for (const auto& st : r.transcript) flipped |= st.label != test.labels[i];
      flips += flipped;
    }
    ++attacked;
  }
  return {flips == 0 && attacked >= 90,
          "points attacked " + std::to_string(attacked) + " (3 budgets each), flips " + std::to_string(flips)};
}

Outcome exact_radius() {
  const auto dict = std::make_shared<const data::Dictionary>(Mat::Identity(2, 2), std::vector<Label>{0, 1}, 2);
  const Vec x = Eigen::Vector2d(0.5, 0.0);
  const auto sol = bpdn::solve(*dict, x, 4.0);
  const auto cert = certificate::build_certificate(dict, sol, bpdn::active_set(*dict, sol));
  const double r0 = certificate::exact_l2_radius(cert).r0;
  bool ok = std::abs(r0 - 0.25) <= 1e-6;
  int outside = 0;
  numerics::Rng rng(110);
  std::mt19937_64 gen(111);
  // Plus random 3-D instances.
  std::vector<std::pair<certificate::CertificatePolyhedron, Vec>> cases{{cert, x}};
  while (cases.size() < 4) {
    const auto d3 = labelled(random_columns(3, 8, gen), 2);
    const Vec x3 = random_unit(3, gen);
    const auto s3 = bpdn::solve(*d3, x3, 3.0);
    const auto a3 = bpdn::active_set(*d3, s3);
    if (a3.empty()) continue;
    cases.emplace_back(certificate::build_certificate(d3, s3, a3), x3);
  }
  for (const auto& [c, anchor] : cases) {
    const double r = certificate::exact_l2_radius(c).r0;
    for (int i = 0; i < 1000; ++i) {
      outside += !certificate::contains(c, anchor + 0.999 * r * rng.unit_vector(anchor.size()));
    }
  }
  ok = ok && outside == 0;
  return {ok, "hand example r0 " + fmt(r0) + ", sampled points outside " + std::to_string(outside) + "/4000"};
}

Outcome sphere() {
  analytic::SphereExampleParams p;
  bool linear = true;
  for (int i = 0; i <= 10; ++i) {
    const double eps = 0.01 * i;
    linear = linear && std::abs(analytic::sphere_risk(p, eps).class1 - eps / 0.1) <= 1e-15;
  }
  const double edge = std::numbers::pi / 2 - p.theta0;
  const double jump = analytic::sphere_risk(p, edge + 0.2).risk - analytic::sphere_risk(p, edge - 0.2).risk;
  const double jump2 = analytic::sphere_risk(p, edge + 0.2).class2 - analytic::sphere_risk(p, edge - 0.2).class2;
  numerics::Rng rng(112);
  const int trials = 1000000;
  int hits = 0;
  const double alpha = 1.0;
  for (int i = 0; i < trials; ++i) hits += std::acos(rng.unit_vector(10)[0]) <= alpha;
  const double mc = static_cast<double>(hits) / trials;
  const double cap = analytic::cap_measure(10, alpha);
  return {linear && jump >= 0.2 && jump2 >= 0.2 && std::abs(mc - cap) <= 0.01,
          std::string("class-1 linear ") + (linear ? "yes" : "no") + ", class-2 increase " + fmt(jump2) +
              ", cap MC " + fmt(mc) + " vs " + fmt(cap)};
}

Outcome cube() {
  bool ok = true;
  double worst = -1.0;
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double eps : {0.0, 0.05, 0.1}) {
      analytic::CubeExampleParams p;
      p.alpha = alpha;
      p.epsilon = eps;
      const auto est = analytic::cube_empirical_risk(p, 10000, 113);
      worst = std::max(worst, est.risk - est.bound);
      ok = ok && est.risk <= est.bound;
      const auto [c, s] = analytic::cube_concentration(p);
      ok = ok && c.c == 0.5 && c.epsilon == alpha / p.n - 1.0 && c.delta == 0.0;
      ok = ok && s.gamma == 0.5 * std::exp(-alpha) + 2.0 * eps && s.epsilon == eps && s.delta == 0.0;
    }
  }
  return {ok, "max (risk - bound) " + fmt(worst)};
}

Outcome mnist() {
  const fs::path dir(mnist_dir);
  const fs::path train = dir / "train-images-idx3-ubyte.gz";
  if (!fs::exists(train)) return {false, "MNIST sample not found under " + dir.string()};
  const auto out = test::scratch_dir("acceptance_mnist");
  const auto r = test::run({"certify", "--data", "idx", "--train-images", train.string(), "--train-labels",
                            (dir / "train-labels-idx1-ubyte.gz").string(), "--test-images",
                            (dir / "t10k-images-idx3-ubyte.gz").string(), "--test-labels",
                            (dir / "t10k-labels-idx1-ubyte.gz").string(), "--dict-size", "2000", "--lambda", "2",
                            "--rule", "majority", "--test-points", "100", "--seed", "0", "--out", out.string()});
  if (r.code != 0) return {false, "certify failed: " + r.err};
  double acc = -1.0;
  for (const auto& row : test::read_csv(out / "summary.csv")) {
    if (row.size() == 2 && row[0] == "clean_accuracy") acc = std::stod(row[1]);
  }
  return {acc >= 0.90, "clean accuracy " + fmt(acc) + " on 100 points (M=2000, lambda=2)"};
}

Outcome smoothing_curves() {
  smoothing::SmoothingConfig cfg;
  const double r = smoothing::all_agree_radius(cfg);
  const double want = 0.02 * numerics::inv_norm_cdf(std::pow(0.001, 0.01));
  bool ok = std::abs(r - 0.0300) <= 1e-4 && std::abs(r - want) <= 1e-12;
  const auto out = test::scratch_dir("acceptance_rs");
  for (const std::string base : {"dual", "ns"}) {
    const auto res = test::run({"rs-curve", "--base", base, "--dict-size", "200", "--test-points", "20", "--radii",
                                "0:0.035:15", "--out", out.string()});
    if (res.code != 0) return {false, "rs-curve failed: " + res.err};
    const auto rows = test::read_csv(out / "rs_curve.csv");
    for (std::size_t i = 2; i < rows.size(); ++i) ok = ok && std::stod(rows[i][1]) <= std::stod(rows[i - 1][1]);
  }
  return {ok, "all-agree radius " + fmt(r) + ", curves nonincreasing " + (ok ? "yes" : "no")};
}

Outcome determinism() {
  int compared = 0, differing = 0;
  std::string bad;
  int idx = 0;
  for (auto args : test::small_commands()) {
    const auto a = test::scratch_dir("acceptance_det_a" + std::to_string(idx));
    const auto b = test::scratch_dir("acceptance_det_b" + std::to_string(idx++));
    auto args_a = args, args_b = args;
    args_a.insert(args_a.end(), {"--seed", "7", "--out", a.string()});
    args_b.insert(args_b.end(), {"--seed", "7", "--out", b.string()});
    if (test::run(args_a).code != 0 || test::run(args_b).code != 0) return {false, args[0] + " failed"};
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++compared;
      if (test::read_text(e.path()) != test::read_text(b / fs::relative(e.path(), a))) {
        ++differing;
        bad += " " + args[0] + "/" + e.path().filename().string();
      }
    }
  }
  return {differing == 0 && compared >= 8,
          std::to_string(compared) + " CSV files compared, " + std::to_string(differing) + " differ" + bad};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--mnist-dir") mnist_dir = argv[i + 1];
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"bpdn optimality", optimality},
      {"projection equivalence", projection},
      {"certificate invariance", invariance},
      {"attack inside certificate", attack_inside},
      {"exact radius", exact_radius},
      {"sphere example", sphere},
      {"cube example", cube},
      {"mnist accuracy", mnist},
      {"smoothing", smoothing_curves},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << " ("
              << o.detail << ")" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

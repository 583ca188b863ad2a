#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "polycert/analytic.hpp"
#include "polycert/bpdn.hpp"
#include "polycert/certificate.hpp"
#include "polycert/classifier.hpp"
#include "polycert/cli.hpp"
#include "polycert/numerics.hpp"
#include "polycert/smoothing.hpp"

namespace py = pybind11;
using namespace polycert;

namespace {

py::list active_list(const bpdn::ActiveSet& a) {
  py::list out;
  for (const auto& e : a.entries) out.append(py::make_tuple(e.index, e.sign));
  return out;
}

// Dual prediction together with its certificate, if one exists.
struct Certified {
  std::shared_ptr<const data::Dictionary> dict;
  classifier::DualPrediction pred;

  const certificate::CertificatePolyhedron& cert() const {
    if (!pred.certificate) throw certificate::CertificateError("no certificate: empty active set");
    return *pred.certificate;
  }
};

Certified certify(const Mat& atoms, const std::vector<Label>& labels, int num_classes, const Vec& x, double lambda,
                  const std::string& rule, double tau) {
  Certified c;
  c.dict = std::make_shared<const data::Dictionary>(atoms, labels, num_classes);
  classifier::DualOptions o;
  o.lambda = lambda;
  o.rule = classifier::parse_rule(rule);
  o.tau = tau;
  c.pred = classifier::predict_dual(c.dict, x, o);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Certified robustness for union-of-subspaces classifiers";

  py::register_exception<Error>(m, "PolycertError");
  py::register_exception<ArgumentError>(m, "ArgumentError");

  m.def("reg_inc_beta", &numerics::reg_inc_beta, py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("norm_cdf", &numerics::norm_cdf, py::arg("x"));
  m.def("inv_norm_cdf", &numerics::inv_norm_cdf, py::arg("p"));
  m.def(
      "clopper_pearson_lower",
      [](std::int64_t k, std::int64_t n, double conf) {
        return numerics::clopper_pearson_lower(k, n, numerics::ConfidenceLevel(conf));
      },
      py::arg("successes"), py::arg("trials"), py::arg("confidence"));

  m.def(
      "bpdn_solve",
      [](const Mat& atoms, const Vec& x, double lambda, double tau) {
        const auto sol = bpdn::solve(atoms, x, lambda);
        py::dict d;
        d["c"] = sol.c;
        d["d"] = sol.d;
        d["e"] = sol.e;
        d["primal"] = sol.primal_value;
        d["dual"] = sol.dual_value;
        d["gap"] = sol.gap;
        d["iterations"] = sol.iterations;
        d["polished"] = sol.polished;
        d["active"] = active_list(bpdn::active_set(atoms, sol, tau));
        return d;
      },
      py::arg("atoms"), py::arg("x"), py::arg("lambda_"), py::arg("tau") = bpdn::kDefaultTau);

  py::class_<Certified>(m, "Certified")
      .def_property_readonly("label", [](const Certified& c) { return c.pred.prediction.label; })
      .def_property_readonly("votes", [](const Certified& c) { return c.pred.prediction.votes; })
      .def_property_readonly("active", [](const Certified& c) { return active_list(c.pred.active); })
      .def_property_readonly("dual_point", [](const Certified& c) { return Vec(c.pred.solution.d); })
      .def_property_readonly("has_certificate", [](const Certified& c) { return c.pred.certificate.has_value(); })
      .def(
          "contains", [](const Certified& c, const Vec& x) { return certificate::contains(c.cert(), x); },
          py::arg("x"))
      .def(
          "project", [](const Certified& c, const Vec& y) { return certificate::project_onto(c.cert(), y); },
          py::arg("y"))
      .def("exact_radius", [](const Certified& c) {
        const auto r = certificate::exact_l2_radius(c.cert());
        return py::make_tuple(r.r0, Vec(r.witness_u), r.vertex_count);
      });

  m.def("certify", &certify, py::arg("atoms"), py::arg("labels"), py::arg("num_classes"), py::arg("x"),
        py::arg("lambda_") = 2.0, py::arg("rule") = "majority", py::arg("tau") = bpdn::kDefaultTau);

  m.def(
      "all_agree_radius",
      [](double sigma, int n, double confidence) {
        smoothing::SmoothingConfig cfg;
        cfg.sigma = sigma;
        cfg.n = n;
        cfg.confidence = numerics::ConfidenceLevel(confidence);
        return smoothing::all_agree_radius(cfg);
      },
      py::arg("sigma") = 0.02, py::arg("n") = 100, py::arg("confidence") = 0.999);

  m.def("cap_measure", &analytic::cap_measure, py::arg("n"), py::arg("alpha"));
  m.def(
      "sphere_risk_curve",
      [](int n, double theta0, const std::vector<double>& eps) {
        analytic::SphereExampleParams p;
        p.n = n;
        p.theta0 = theta0;
        std::vector<std::tuple<double, double, double, double>> rows;
        for (const auto& r : analytic::sphere_risk_curve(p, eps)) rows.emplace_back(r.epsilon, r.class1, r.class2, r.risk);
        return rows;
      },
      py::arg("n"), py::arg("theta0"), py::arg("eps_grid"));
  m.def(
      "cube_risk",
      [](int n, double alpha, double eps, std::size_t samples, std::uint64_t seed) {
        analytic::CubeExampleParams p;
        p.n = n;
        p.alpha = alpha;
        p.epsilon = eps;
        const auto e = analytic::cube_empirical_risk(p, samples, seed);
        return py::make_tuple(e.risk, e.bound);
      },
      py::arg("n"), py::arg("alpha"), py::arg("epsilon"), py::arg("samples") = 10000, py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"polycert"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}

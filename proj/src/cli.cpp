#include "polycert/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polycert/analytic.hpp"
#include "polycert/attacks.hpp"
#include "polycert/bpdn.hpp"
#include "polycert/certificate.hpp"
#include "polycert/classifier.hpp"
#include "polycert/common.hpp"
#include "polycert/data.hpp"
#include "polycert/io.hpp"
#include "polycert/numerics.hpp"
#include "polycert/smoothing.hpp"

namespace polycert::cli {

namespace {

using Json = nlohmann::ordered_json;
using io::format_double;
using Clock = std::chrono::steady_clock;

// Independent random streams derived from --seed.
enum Stream : std::uint64_t {
  kStreamModel = 1,
  kStreamTrain = 2,
  kStreamTest = 3,
  kStreamDict = 4,
  kStreamShuffle = 5,
  kStreamAttack = 6,
  kStreamSmooth = 7,
  kStreamCube = 8,
};

// Certificate JSON embeds vectors up to this dimension and constraint
// matrices up to this many entries.
constexpr Eigen::Index kEmbedVectorsMaxDim = 64;
constexpr Eigen::Index kEmbedMatrixMaxEntries = 8192;
constexpr Eigen::Index kFullDictionarySize = 10000;

struct Options {
  // data
  std::string data = "synthetic";
  std::string train_images = "data/mnist-sample/train-images-idx3-ubyte.gz";
  std::string train_labels = "data/mnist-sample/train-labels-idx1-ubyte.gz";
  std::string test_images = "data/mnist-sample/t10k-images-idx3-ubyte.gz";
  std::string test_labels = "data/mnist-sample/t10k-labels-idx1-ubyte.gz";
  std::string train_csv;
  std::string test_csv;
  int classes = 2;
  long ambient = 20;
  long subspace_dim = 3;
  double gamma = 0.0;
  long train_points = 0;
  long dict_size = 2000;
  bool full = false;
  long test_points = 100;
  bool balanced = false;
  // dual classifier
  double lambda = 2.0;
  double tau = bpdn::kDefaultTau;
  double tol = bpdn::kDefaultTol;
  std::string rule = "majority";
  bool exact_radius = false;
  long max_vertices = static_cast<long>(certificate::kDefaultMaxVertices);
  // attacks
  std::string eps_grid;
  int steps = 20;
  double step_size = 0.0;
  std::string target = "dual";
  long ns_dim = 0;
  double face_margin = 1e-5;
  int grad_samples = 20;
  int init_trials = 200;
  int probes = 50;
  // smoothing
  double sigma = 0.02;
  int n0 = 100;
  int n = 100;
  double confidence = 0.999;
  std::string radii = "0:0.035:15";
  std::string base = "dual";
  // analytic
  int dim = 100;
  double theta0 = 0.1;
  std::string psi = "constant";
  std::string branch = "geometric";
  std::string alphas = "0.5,1,2";
  long samples = 10000;
  long points = 1000;
  std::string m_grid = "1,2,5,10,20,50,100,200";
  bool within_class = false;
  // run
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  bool plot = false;
  std::string config;
};

std::string to_text(const std::string& v) { return v; }
std::string to_text(bool v) { return v ? "true" : "false"; }
std::string to_text(double v) { return format_double(v); }
template <class T>
std::string to_text(T v) {
  return std::to_string(v);
}

// A subcommand plus the flags it accepts, kept for config loading and snapshots.
struct Command {
  struct Entry {
    std::string name;
    bool is_flag = false;
    std::function<std::string()> value;
  };
  CLI::App* app = nullptr;
  Options opt;
  std::vector<Entry> entries;

  template <class T>
  void add(const std::string& name, T& var, const std::string& desc) {
    app->add_option("--" + name, var, desc)->capture_default_str();
    entries.push_back({name, false, [&var] { return to_text(var); }});
  }
  void flag(const std::string& name, bool& var, const std::string& desc) {
    app->add_flag("--" + name, var, desc);
    entries.push_back({name, true, [&var] { return to_text(var); }});
  }
  const Entry* find(const std::string& name) const {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }
  std::vector<std::pair<std::string, std::string>> snapshot() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : entries) {
      if (e.name != "config") out.emplace_back(e.name, e.value());
    }
    return out;
  }
  std::string snapshot_text() const {
    std::string s;
    for (const auto& [k, v] : snapshot()) s += k + "=" + v + "\n";
    return s;
  }
};

void add_run_flags(Command& c, const std::string& command) {
  c.opt.out = "out/" + command;
  c.add("seed", c.opt.seed, "Base random seed");
  c.add("out", c.opt.out, "Output directory");
  c.add("config", c.opt.config, "Flat key=value file; keys are flag names");
  c.add("threads", c.opt.threads, "Worker threads for per-point work");
}

void add_data_flags(Command& c) {
  c.add("data", c.opt.data, "Dataset source: synthetic, idx or csv");
  c.add("train-images", c.opt.train_images, "IDX training images (gzip allowed)");
  c.add("train-labels", c.opt.train_labels, "IDX training labels");
  c.add("test-images", c.opt.test_images, "IDX test images");
  c.add("test-labels", c.opt.test_labels, "IDX test labels");
  c.add("train-csv", c.opt.train_csv, "Training set CSV (label,x0,...)");
  c.add("test-csv", c.opt.test_csv, "Test set CSV");
  c.add("classes", c.opt.classes, "Synthetic: number of subspaces");
  c.add("ambient", c.opt.ambient, "Synthetic: ambient dimension");
  c.add("subspace-dim", c.opt.subspace_dim, "Synthetic: subspace dimension");
  c.add("gamma", c.opt.gamma, "Synthetic: distance of points from their subspace");
  c.add("train-points", c.opt.train_points, "Training points to load or generate (0: dictionary size)");
  c.add("test-points", c.opt.test_points, "Number of test points");
}

void add_dual_flags(Command& c) {
  c.add("dict-size", c.opt.dict_size, "Dictionary columns M");
  c.flag("full", c.opt.full, "Use the full-size dictionary (M = 10000)");
  c.flag("balanced", c.opt.balanced, "Sample M / K columns per class");
  c.add("lambda", c.opt.lambda, "Regularization weight");
  c.add("tau", c.opt.tau, "Active-set tolerance");
  c.add("tol", c.opt.tol, "Relative duality gap tolerance");
  c.add("rule", c.opt.rule, "Vote aggregation: majority or unanimous");
}

std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ArgumentError(what + ": cannot parse '" + s + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ArgumentError(what + ": range form is start:stop:count");
    const double a = number(parts[0]);
    const double b = number(parts[1]);
    const double cnt = number(parts[2]);
    if (cnt < 1 || cnt != std::floor(cnt)) throw ArgumentError(what + ": count must be a positive integer");
    const auto k = static_cast<int>(cnt);
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    if (!p.empty()) out.push_back(number(p));
  }
  if (out.empty()) throw ArgumentError(what + ": empty list");
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  for (double v : parse_grid(text, what)) {
    if (v < 1 || v != std::floor(v)) throw ArgumentError(what + ": entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

struct Loaded {
  data::LabeledDataset train;
  data::LabeledDataset test;
};

data::LabeledDataset take_first(const data::LabeledDataset& d, std::size_t count) {
  std::vector<std::size_t> idx(std::min(count, d.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return d.subset(idx);
}

data::LabeledDataset shuffled(const data::LabeledDataset& d, std::uint64_t seed) {
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return d.subset(idx);
}

Loaded load_data(const Options& o, std::size_t train_count) {
  if (o.test_points < 1) throw ArgumentError("test-points must be >= 1");
  if (o.train_points < 0) throw ArgumentError("train-points must be >= 0");
  const auto tests = static_cast<std::size_t>(o.test_points);
  Loaded l;
  if (o.data == "synthetic") {
    if (o.classes < 1) throw ArgumentError("classes must be >= 1");
    const auto model = data::random_subspace_model(o.classes, o.ambient, o.subspace_dim, o.gamma,
                                                   numerics::derive_seed(o.seed, kStreamModel));
    auto per_class = [&](std::size_t total) {
      return static_cast<int>((total + static_cast<std::size_t>(o.classes) - 1) / static_cast<std::size_t>(o.classes));
    };
    l.train = shuffled(data::generate_uos(model, per_class(train_count), numerics::derive_seed(o.seed, kStreamTrain)),
                       numerics::derive_seed(o.seed, kStreamShuffle));
    l.train = take_first(l.train, train_count);
    l.test = shuffled(data::generate_uos(model, per_class(tests), numerics::derive_seed(o.seed, kStreamTest)),
                      numerics::derive_seed(o.seed, kStreamShuffle + 100));
  } else if (o.data == "idx") {
    l.train = data::load_idx_images(o.train_images, o.train_labels, o.train_points > 0 ? train_count : 0);
    l.test = data::load_idx_images(o.test_images, o.test_labels, tests);
  } else if (o.data == "csv") {
    if (o.train_csv.empty() || o.test_csv.empty()) throw ArgumentError("--data csv needs --train-csv and --test-csv");
    l.train = data::read_dataset_csv(o.train_csv);
    l.test = data::read_dataset_csv(o.test_csv);
    if (o.train_points > 0) l.train = take_first(l.train, train_count);
  } else {
    throw ArgumentError("unknown --data '" + o.data + "' (synthetic, idx, csv)");
  }
  l.test = take_first(l.test, tests);
  if (l.test.empty()) throw ArgumentError("test set is empty");
  if (l.train.dim != l.test.dim) throw ArgumentError("train and test dimensions differ");
  return l;
}

std::size_t train_count(const Options& o) {
  if (o.train_points > 0) return static_cast<std::size_t>(o.train_points);
  return static_cast<std::size_t>(std::max<long>(o.dict_size, 1));
}

long effective_dict_size(const Options& o) {
  return o.full ? static_cast<long>(kFullDictionarySize) : o.dict_size;
}

classifier::DualOptions dual_options(const Options& o, bool with_certificate) {
  if (!(o.lambda > 0.0) || !std::isfinite(o.lambda)) throw ArgumentError("lambda must be positive");
  if (!(o.tau > 0.0) || o.tau >= 1.0) throw ArgumentError("tau must lie in (0, 1)");
  if (!(o.tol > 0.0)) throw ArgumentError("tol must be positive");
  classifier::DualOptions d;
  d.lambda = o.lambda;
  d.rule = classifier::parse_rule(o.rule);
  d.tau = o.tau;
  d.solver.tol = o.tol;
  d.build_certificate = with_certificate;
  return d;
}

std::shared_ptr<const data::Dictionary> make_dictionary(const Options& o, const data::LabeledDataset& train) {
  const long m = effective_dict_size(o);
  if (m < 1) throw ArgumentError("dict-size must be >= 1 (empty dictionary)");
  return std::make_shared<const data::Dictionary>(
      data::build_dictionary(train, m, numerics::derive_seed(o.seed, kStreamDict), o.balanced));
}

Loaded load_for_dual(Options& o) {
  if (effective_dict_size(o) < 1) throw ArgumentError("dict-size must be >= 1 (empty dictionary)");
  Options copy = o;
  copy.dict_size = effective_dict_size(o);
  return load_data(copy, train_count(copy));
}

// Per-point result of the dual classifier.
struct DualRecord {
  std::optional<classifier::DualPrediction> pred;
  std::optional<certificate::ExactRadiusResult> radius;
  std::string radius_note;
  std::string error;
};

std::vector<DualRecord> run_dual(const std::shared_ptr<const data::Dictionary>& dict, const data::LabeledDataset& test,
                                 const classifier::DualOptions& dopts, int threads, bool exact, std::size_t max_vertices) {
  std::vector<DualRecord> rec(test.size());
  io::parallel_for(test.size(), threads, [&](std::size_t i) {
    try {
      rec[i].pred = classifier::predict_dual(dict, test.points[i], dopts);
      if (exact && rec[i].pred->certificate) {
        try {
          rec[i].radius = certificate::exact_l2_radius(*rec[i].pred->certificate, max_vertices);
        } catch (const SizeError& e) {
          rec[i].radius_note = e.what();
        }
      }
    } catch (const Error& e) {
      rec[i].error = e.what();
    }
  });
  return rec;
}

Json vector_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

Json certificate_json(std::size_t index, Label label, const DualRecord& r, const data::Dictionary& dict, double tau) {
  Json j;
  j["index"] = index;
  j["label"] = label;
  if (!r.error.empty() || !r.pred) {
    j["predicted"] = nullptr;
    j["error"] = r.error;
    return j;
  }
  const auto& p = *r.pred;
  j["predicted"] = p.prediction.label;
  j["correct"] = p.prediction.label == label;
  j["votes"] = p.prediction.votes;
  j["lambda"] = p.solution.lambda;
  j["tau"] = tau;
  Json active = Json::array();
  for (const auto& e : p.active.entries) {
    active.push_back({{"column", e.index}, {"sign", e.sign}, {"class", dict.label(e.index)}});
  }
  j["active_set"] = active;
  j["near_degenerate"] = p.active.near_degenerate;
  j["solver"] = {{"primal", p.solution.primal_value},
                 {"dual", p.solution.dual_value},
                 {"gap", p.solution.gap},
                 {"iterations", p.solution.iterations},
                 {"polished", p.solution.polished}};
  if (p.certificate) {
    const auto& c = *p.certificate;
    Json cj;
    cj["rank"] = c.rank();
    cj["face_dim"] = c.face_dim();
    cj["inactive_count"] = c.inactive_ids().size();
    if (r.radius) {
      cj["exact_radius"] = {{"r0", r.radius->r0},
                            {"support", r.radius->support},
                            {"cone_facet", r.radius->cone_facet},
                            {"vertex_count", r.radius->vertex_count}};
    } else if (!r.radius_note.empty()) {
      cj["exact_radius"] = {{"skipped", r.radius_note}};
    } else {
      cj["exact_radius"] = nullptr;
    }
    if (c.anchor().size() <= kEmbedVectorsMaxDim) {
      cj["anchor"] = vector_json(c.anchor());
      cj["dual_point"] = vector_json(c.dual_point());
      cj["face_point"] = vector_json(c.face_point());
      if (r.radius) cj["witness_u"] = vector_json(r.radius->witness_u);
    }
    const auto inactive = static_cast<Eigen::Index>(c.inactive_ids().size());
    if ((inactive + c.cone_generators().cols()) * c.anchor().size() <= kEmbedMatrixMaxEntries) {
      cj["equality_normals"] = matrix_json(c.equality_normals());
      cj["inequality_normals"] = matrix_json(c.inequality_normals());
    }
    j["certificate"] = cj;
  } else {
    j["certificate"] = nullptr;
  }
  j["error"] = nullptr;
  return j;
}

std::string point_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "point_%05zu.json", i);
  return std::string("certificates/") + buf;
}

void maybe_plot(const Options& o, io::RunManifest& manifest, const std::string& file, const std::string& title,
                const std::string& xl, const std::string& yl, const std::vector<io::Series>& series) {
  if (o.plot) manifest.write_artifact(file, io::svg_line_plot(title, xl, yl, series));
}

int finish(io::RunManifest& manifest, const Command& c, Clock::time_point start, bool partial, std::ostream& out) {
  manifest.write_artifact("config.ini", c.snapshot_text());
  manifest.set_config(c.snapshot());
  manifest.add_seed("seed", c.opt.seed);
  manifest.add_timing("total", io::elapsed_seconds(start));
  manifest.set_status(partial ? "partial" : "ok");
  manifest.finish();
  out << "wrote " << (manifest.out_dir() / "manifest.json").string() << (partial ? " (partial)" : "") << "\n";
  return partial ? kExitFailure : kExitOk;
}

int cmd_certify(const Command& c, std::ostream& out, std::ostream& err) {
  Options o = c.opt;
  const auto start = Clock::now();
  const auto dopts = dual_options(o, true);
  if (o.max_vertices < 1) throw ArgumentError("max-vertices must be >= 1");
  const Loaded l = load_for_dual(o);
  const auto dict = make_dictionary(o, l.train);
  io::RunManifest manifest(o.out, "certify");

  const auto solve_start = Clock::now();
  const auto rec = run_dual(dict, l.test, dopts, o.threads, o.exact_radius, static_cast<std::size_t>(o.max_vertices));
  manifest.add_timing("solve", io::elapsed_seconds(solve_start));

  io::CsvTable pred({"index", "label", "predicted", "correct", "active_size", "near_degenerate", "gap", "polished",
                     "iterations", "r0"});
  std::size_t correct = 0, abstain = 0, failures = 0, degenerate = 0, active_total = 0, ok = 0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const Label y = l.test.labels[i];
    manifest.write_artifact(point_name(i), certificate_json(i, y, rec[i], *dict, o.tau).dump(2) + "\n");
    if (!rec[i].pred) {
      ++failures;
      err << "point " << i << ": " << rec[i].error << "\n";
      pred.add_row({std::to_string(i), std::to_string(y), "", "", "", "", "", "", "", ""});
      continue;
    }
    const auto& p = *rec[i].pred;
    ++ok;
    const bool hit = p.prediction.label == y;
    correct += hit;
    abstain += p.prediction.label == kAbstain;
    degenerate += p.active.near_degenerate;
    active_total += p.prediction.active_size;
    pred.add_row({std::to_string(i), std::to_string(y), std::to_string(p.prediction.label), hit ? "1" : "0",
                  std::to_string(p.prediction.active_size), p.active.near_degenerate ? "1" : "0",
                  format_double(p.solution.gap), p.solution.polished ? "1" : "0",
                  std::to_string(p.solution.iterations), rec[i].radius ? format_double(rec[i].radius->r0) : ""});
  }
  manifest.write_artifact("predictions.csv", pred.str());

  const double total = static_cast<double>(rec.size());
  io::CsvTable summary({"metric", "value"});
  summary.add_row({"points", std::to_string(rec.size())});
  summary.add_row({"dictionary_size", std::to_string(dict->size())});
  summary.add_row({"clean_accuracy", format_double(static_cast<double>(correct) / total)});
  summary.add_row({"abstain_rate", format_double(static_cast<double>(abstain) / total)});
  summary.add_row({"mean_active_size", ok ? format_double(static_cast<double>(active_total) / static_cast<double>(ok)) : ""});
  summary.add_row({"near_degenerate", std::to_string(degenerate)});
  summary.add_row({"failures", std::to_string(failures)});
  manifest.write_artifact("summary.csv", summary.str());
  out << "clean_accuracy " << format_double(static_cast<double>(correct) / total) << " abstain_rate "
      << format_double(static_cast<double>(abstain) / total) << "\n";
  return finish(manifest, c, start, failures > 0, out);
}

struct TargetSetup {
  std::function<Label(const Vec&, std::size_t)> predict;
  std::function<Vec(const Vec&, Label, std::size_t)> gradient;
};

Eigen::Index ns_dimension(const Options& o) {
  if (o.ns_dim > 0) return o.ns_dim;
  return o.data == "synthetic" ? o.subspace_dim : 10;
}

smoothing::SmoothingConfig smoothing_config(const Options& o) {
  smoothing::SmoothingConfig s;
  s.sigma = o.sigma;
  s.n0 = o.n0;
  s.n = o.n;
  s.confidence = numerics::ConfidenceLevel(o.confidence);
  s.seed = numerics::derive_seed(o.seed, kStreamSmooth);
  s.validate();
  return s;
}

TargetSetup make_target(const Options& o, const std::string& target, const data::Dictionary& dict,
                        const classifier::DualOptions& label_opts, const data::LabeledDataset& train) {
  TargetSetup t;
  auto model = std::make_shared<data::SubspaceModel>(data::fit_subspace_model(train, ns_dimension(o)));
  if (target == "dual") {
    t.predict = [&dict, label_opts](const Vec& x, std::size_t) { return classifier::predict_dual_label(dict, x, label_opts); };
    t.gradient = [model](const Vec& x, Label y, std::size_t) { return attacks::margin_loss_gradient(*model, x, y); };
  } else if (target == "ns") {
    t.predict = [model](const Vec& x, std::size_t) { return classifier::predict_nearest_subspace(*model, x); };
    t.gradient = [model](const Vec& x, Label y, std::size_t) { return attacks::margin_loss_gradient(*model, x, y); };
  } else if (target == "smoothed-ns") {
    const auto scfg = smoothing_config(o);
    const int samples = o.grad_samples;
    if (samples < 1) throw ArgumentError("grad-samples must be >= 1");
    t.predict = [model, scfg](const Vec& x, std::size_t i) {
      smoothing::BaseClassifier base = [model](const Vec& v) { return classifier::predict_nearest_subspace(*model, v); };
      return smoothing::smooth_predict(base, x, smoothing::for_point(scfg, i));
    };
    t.gradient = [model, scfg, samples](const Vec& x, Label y, std::size_t i) {
      return attacks::soft_vote_gradient(*model, x, y, scfg.sigma, samples,
                                         numerics::derive_seed(smoothing::for_point(scfg, i).seed, 1));
    };
  } else {
    throw ArgumentError("unknown --target '" + target + "' (dual, ns, smoothed-ns)");
  }
  return t;
}

int cmd_attack_proj(const Command& c, std::ostream& out, std::ostream& err) {
  Options o = c.opt;
  const auto start = Clock::now();
  const auto dopts = dual_options(o, true);
  const auto label_opts = dual_options(o, false);
  const auto eps = parse_grid(o.eps_grid, "eps-grid");
  for (double e : eps) {
    if (!(e >= 0.0)) throw ArgumentError("eps-grid entries must be >= 0");
  }
  if (o.steps < 1) throw ArgumentError("steps must be >= 1");
  if (!(o.step_size >= 0.0)) throw ArgumentError("step-size must be >= 0");
  if (!(o.face_margin >= 0.0)) throw ArgumentError("face-margin must be >= 0");
  const Loaded l = load_for_dual(o);
  const auto dict = make_dictionary(o, l.train);
  const TargetSetup target = make_target(o, o.target, *dict, label_opts, l.train);
  io::RunManifest manifest(o.out, "attack-proj");

  const auto rec = run_dual(dict, l.test, dopts, o.threads, false, 0);

  struct Cell {
    bool robust = false;
    bool success = false;
    double final_l2 = 0.0;
    bool in_certificate = false;
    std::string status;
    std::vector<attacks::AttackStep> transcript;
  };
  const std::size_t np = l.test.size();
  std::vector<Label> clean(np, kAbstain);
  std::vector<std::vector<Cell>> cells(np, std::vector<Cell>(eps.size()));
  std::vector<std::string> errors(np);
  const std::uint64_t attack_seed = numerics::derive_seed(o.seed, kStreamAttack);

  io::parallel_for(np, o.threads, [&](std::size_t i) {
    const Vec& x = l.test.points[i];
    const Label y = l.test.labels[i];
    try {
      clean[i] = target.predict(x, i);
      for (std::size_t k = 0; k < eps.size(); ++k) {
        Cell& cell = cells[i][k];
        if (clean[i] != y) {
          cell.status = "misclassified";
          continue;
        }
        if (eps[k] == 0.0) {
          cell.robust = true;
          cell.in_certificate = true;
          cell.status = "clean";
          continue;
        }
        if (!rec[i].pred || !rec[i].pred->certificate) {
          cell.robust = true;
          cell.status = "no-certificate";
          continue;
        }
        attacks::AttackTarget at;
        at.predict = [&](const Vec& v) { return target.predict(v, i); };
        at.loss_gradient = [&](const Vec& v, Label lab) { return target.gradient(v, lab, i); };
        attacks::AttackConfig cfg;
        cfg.epsilon = eps[k];
        cfg.steps = o.steps;
        cfg.step_size = o.step_size > 0.0 ? o.step_size : 2.5 * eps[k] / o.steps;
        cfg.seed = numerics::derive_seed(attack_seed, i);
        attacks::PgdOptions popts;
        popts.face_margin = o.face_margin;
        const auto res = attacks::pgd_in_certificate(at, x, y, *rec[i].pred->certificate, cfg, popts);
        cell.success = res.success;
        cell.robust = !res.success;
        cell.final_l2 = res.final_l2;
        cell.in_certificate = res.in_certificate;
        cell.status = "attacked";
        cell.transcript = res.transcript;
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::size_t failures = 0;
  std::size_t dual_correct = 0;
  for (std::size_t i = 0; i < np; ++i) {
    if (!rec[i].error.empty()) errors[i] = rec[i].error;
    if (!errors[i].empty()) {
      ++failures;
      err << "point " << i << ": " << errors[i] << "\n";
    }
    if (rec[i].pred && rec[i].pred->prediction.label == l.test.labels[i]) ++dual_correct;
  }
  const double dual_acc = static_cast<double>(dual_correct) / static_cast<double>(np);

  io::CsvTable points({"index", "epsilon", "label", "clean_prediction", "success", "final_l2", "in_certificate", "status"});
  io::CsvTable transcript({"index", "epsilon", "step", "l2", "label", "in_certificate"});
  io::CsvTable curve({"epsilon", "target", "robust_accuracy", "dual_clean_accuracy", "points"});
  io::Series target_series{o.target, {}, {}};
  io::Series dual_series{"dual (clean)", {}, {}};
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::size_t robust = 0;
    for (std::size_t i = 0; i < np; ++i) {
      const Cell& cell = cells[i][k];
      const bool failed = !errors[i].empty();
      robust += !failed && cell.robust;
      points.add_row({std::to_string(i), format_double(eps[k]), std::to_string(l.test.labels[i]),
                      std::to_string(clean[i]), cell.success ? "1" : "0", format_double(cell.final_l2),
                      cell.in_certificate ? "1" : "0", failed ? "error" : cell.status});
      for (const auto& st : cell.transcript) {
        transcript.add_row({std::to_string(i), format_double(eps[k]), std::to_string(st.step), format_double(st.l2),
                            std::to_string(st.label), st.in_certificate ? "1" : "0"});
      }
    }
    const double acc = static_cast<double>(robust) / static_cast<double>(np);
    curve.add_row({format_double(eps[k]), o.target, format_double(acc), format_double(dual_acc), std::to_string(np)});
    target_series.x.push_back(eps[k]);
    target_series.y.push_back(acc);
    dual_series.x.push_back(eps[k]);
    dual_series.y.push_back(dual_acc);
  }
  manifest.write_artifact("attack_points.csv", points.str());
  manifest.write_artifact("attack_curve.csv", curve.str());
  manifest.write_artifact("attack_transcript.csv", transcript.str());
  maybe_plot(o, manifest, "attack_curve.svg", "Attacks restricted to the certificate", "epsilon", "robust accuracy",
             {target_series, dual_series});
  return finish(manifest, c, start, failures > 0, out);
}

int cmd_attack_bb(const Command& c, std::ostream& out, std::ostream& err) {
  Options o = c.opt;
  const auto start = Clock::now();
  const auto label_opts = dual_options(o, false);
  const auto eps = parse_grid(o.eps_grid, "eps-grid");
  if (o.target == "smoothed-ns") throw ArgumentError("attack-bb supports --target dual or ns");
  if (o.steps < 1) throw ArgumentError("steps must be >= 1");
  if (o.init_trials < 1 || o.probes < 1) throw ArgumentError("init-trials and probes must be >= 1");
  const Loaded l = load_for_dual(o);
  const auto dict = make_dictionary(o, l.train);
  const TargetSetup target = make_target(o, o.target, *dict, label_opts, l.train);
  io::RunManifest manifest(o.out, "attack-bb");

  const std::size_t np = l.test.size();
  std::vector<Label> clean(np, kAbstain);
  std::vector<attacks::AttackResult> res(np);
  std::vector<std::string> errors(np);
  const std::uint64_t attack_seed = numerics::derive_seed(o.seed, kStreamAttack);
  attacks::BoundaryOptions bopts;
  bopts.init_trials = o.init_trials;
  bopts.probes = o.probes;
  io::parallel_for(np, o.threads, [&](std::size_t i) {
    try {
      auto predict = [&](const Vec& v) { return target.predict(v, i); };
      clean[i] = predict(l.test.points[i]);
      attacks::AttackConfig cfg;
      cfg.steps = o.steps;
      cfg.seed = numerics::derive_seed(attack_seed, i);
      res[i] = attacks::boundary_attack(predict, l.test.points[i], l.test.labels[i], cfg, bopts);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::size_t failures = 0;
  io::CsvTable points({"index", "label", "clean_prediction", "success", "final_l2"});
  std::vector<double> dist(np, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    if (!errors[i].empty()) {
      ++failures;
      err << "point " << i << ": " << errors[i] << "\n";
      points.add_row({std::to_string(i), std::to_string(l.test.labels[i]), "", "", ""});
      continue;
    }
    const bool correct = clean[i] == l.test.labels[i];
    dist[i] = !correct ? 0.0 : (res[i].success ? res[i].final_l2 : std::numeric_limits<double>::infinity());
    points.add_row({std::to_string(i), std::to_string(l.test.labels[i]), std::to_string(clean[i]),
                    res[i].success ? "1" : "0", res[i].success ? format_double(res[i].final_l2) : ""});
  }
  io::CsvTable curve({"epsilon", "target", "robust_accuracy", "points"});
  io::Series series{o.target, {}, {}};
  for (double e : eps) {
    std::size_t robust = 0;
    for (std::size_t i = 0; i < np; ++i) robust += errors[i].empty() && clean[i] == l.test.labels[i] && dist[i] > e;
    const double acc = static_cast<double>(robust) / static_cast<double>(np);
    curve.add_row({format_double(e), o.target, format_double(acc), std::to_string(np)});
    series.x.push_back(e);
    series.y.push_back(acc);
  }
  manifest.write_artifact("bb_points.csv", points.str());
  manifest.write_artifact("bb_curve.csv", curve.str());
  maybe_plot(o, manifest, "bb_curve.svg", "Decision-based attack", "epsilon", "robust accuracy", {series});
  return finish(manifest, c, start, failures > 0, out);
}

int cmd_rs_curve(const Command& c, std::ostream& out, std::ostream& err) {
  Options o = c.opt;
  const auto start = Clock::now();
  const auto label_opts = dual_options(o, false);
  const auto scfg = smoothing_config(o);
  const auto radii = parse_grid(o.radii, "radii");
  const Loaded l = load_for_dual(o);
  io::RunManifest manifest(o.out, "rs-curve");

  smoothing::BaseClassifier base;
  std::shared_ptr<const data::Dictionary> dict;
  std::shared_ptr<data::SubspaceModel> model;
  if (o.base == "dual") {
    dict = make_dictionary(o, l.train);
    base = [dict, label_opts](const Vec& x) { return classifier::predict_dual_label(*dict, x, label_opts); };
  } else if (o.base == "ns") {
    model = std::make_shared<data::SubspaceModel>(data::fit_subspace_model(l.train, ns_dimension(o)));
    base = [model](const Vec& x) { return classifier::predict_nearest_subspace(*model, x); };
  } else {
    throw ArgumentError("unknown --base '" + o.base + "' (dual, ns)");
  }

  const std::size_t np = l.test.size();
  std::vector<smoothing::SmoothingCertificate> certs(np);
  std::vector<std::string> errors(np);
  io::parallel_for(np, o.threads, [&](std::size_t i) {
    try {
      certs[i] = smoothing::smooth_certify(base, l.test.points[i], smoothing::for_point(scfg, i));
    } catch (const Error& e) {
      errors[i] = e.what();
      certs[i] = smoothing::SmoothingCertificate{};
    }
  });
  std::size_t failures = 0;
  io::CsvTable points({"index", "label", "predicted", "count", "p_lower", "radius", "correct"});
  for (std::size_t i = 0; i < np; ++i) {
    if (!errors[i].empty()) {
      ++failures;
      err << "point " << i << ": " << errors[i] << "\n";
    }
    const auto& ce = certs[i];
    points.add_row({std::to_string(i), std::to_string(l.test.labels[i]), std::to_string(ce.predicted),
                    std::to_string(ce.count), format_double(ce.p_lower), format_double(ce.radius),
                    ce.predicted == l.test.labels[i] ? "1" : "0"});
  }
  const auto curve_pts = smoothing::accuracy_curve(certs, l.test.labels, radii);
  io::CsvTable curve({"epsilon", "certified_accuracy", "n_points", "sigma", "confidence"});
  io::Series series{"smoothed " + o.base, {}, {}};
  for (const auto& p : curve_pts) {
    curve.add_row({format_double(p.epsilon), format_double(p.certified_accuracy), std::to_string(np),
                   format_double(o.sigma), format_double(o.confidence)});
    series.x.push_back(p.epsilon);
    series.y.push_back(p.certified_accuracy);
  }
  manifest.write_artifact("rs_points.csv", points.str());
  manifest.write_artifact("rs_curve.csv", curve.str());
  maybe_plot(o, manifest, "rs_curve.svg", "Certified accuracy under smoothing", "radius", "certified accuracy",
             {series});
  out << "all_agree_radius " << format_double(smoothing::all_agree_radius(scfg)) << "\n";
  return finish(manifest, c, start, failures > 0, out);
}

int cmd_sphere(const Command& c, std::ostream& out, std::ostream&) {
  const Options& o = c.opt;
  const auto start = Clock::now();
  analytic::SphereExampleParams p;
  p.n = o.dim;
  p.theta0 = o.theta0;
  if (o.psi == "constant") {
    p.psi = analytic::Psi::Constant;
  } else if (o.psi == "exp") {
    p.psi = analytic::Psi::ExpDecay;
  } else {
    throw ArgumentError("unknown --psi '" + o.psi + "' (constant, exp)");
  }
  if (o.branch == "geometric") {
    p.branch = analytic::SphereBranch::Geometric;
  } else if (o.branch == "as-displayed") {
    p.branch = analytic::SphereBranch::AsDisplayed;
  } else {
    throw ArgumentError("unknown --branch '" + o.branch + "' (geometric, as-displayed)");
  }
  const auto rows = analytic::sphere_risk_curve(p, parse_grid(o.eps_grid, "eps-grid"));
  io::RunManifest manifest(o.out, "sphere");
  io::CsvTable t({"epsilon", "class1", "class2", "risk"});
  io::Series s1{"class 1", {}, {}}, s2{"class 2", {}, {}}, sr{"risk", {}, {}};
  for (const auto& r : rows) {
    t.add_row({format_double(r.epsilon), format_double(r.class1), format_double(r.class2), format_double(r.risk)});
    for (auto* s : {&s1, &s2, &sr}) s->x.push_back(r.epsilon);
    s1.y.push_back(r.class1);
    s2.y.push_back(r.class2);
    sr.y.push_back(r.risk);
  }
  manifest.write_artifact("sphere.csv", t.str());
  maybe_plot(o, manifest, "sphere.svg", "Sphere example: robust risk", "epsilon", "risk", {s1, s2, sr});
  return finish(manifest, c, start, false, out);
}

int cmd_cube(const Command& c, std::ostream& out, std::ostream&) {
  const Options& o = c.opt;
  const auto start = Clock::now();
  const auto alphas = parse_grid(o.alphas, "alphas");
  const auto eps = parse_grid(o.eps_grid, "eps-grid");
  if (o.samples < 2) throw ArgumentError("samples must be >= 2");
  io::RunManifest manifest(o.out, "cube");
  io::CsvTable t({"alpha", "epsilon", "n", "gamma", "bound", "risk", "class1", "class2", "samples", "conc_c",
                  "conc_epsilon", "conc_delta", "strong_epsilon", "strong_delta", "strong_gamma"});
  const std::uint64_t cube_seed = numerics::derive_seed(o.seed, kStreamCube);
  std::vector<io::Series> series;
  std::uint64_t row = 0;
  for (double a : alphas) {
    io::Series s{"alpha=" + format_double(a), {}, {}};
    for (double e : eps) {
      analytic::CubeExampleParams p;
      p.n = o.dim;
      p.alpha = a;
      p.epsilon = e;
      const auto est = analytic::cube_empirical_risk(p, static_cast<std::size_t>(o.samples),
                                                     numerics::derive_seed(cube_seed, row++));
      const auto [conc, strong] = analytic::cube_concentration(p);
      t.add_row({format_double(a), format_double(e), std::to_string(p.n), format_double(p.gamma()),
                 format_double(est.bound), format_double(est.risk), format_double(est.class1),
                 format_double(est.class2), std::to_string(est.samples), format_double(conc.c),
                 format_double(conc.epsilon), format_double(conc.delta), format_double(strong.epsilon),
                 format_double(strong.delta), format_double(strong.gamma)});
      s.x.push_back(e);
      s.y.push_back(est.risk);
    }
    series.push_back(std::move(s));
  }
  manifest.write_artifact("cube.csv", t.str());
  maybe_plot(o, manifest, "cube.svg", "Cube example: empirical robust risk", "epsilon", "risk", series);
  return finish(manifest, c, start, false, out);
}

int cmd_concentration(const Command& c, std::ostream& out, std::ostream&) {
  Options o = c.opt;
  const auto start = Clock::now();
  if (o.points < 2) throw ArgumentError("points must be >= 2");
  const auto grid = parse_counts(o.m_grid, "m-grid");
  o.train_points = o.points;
  const Loaded l = load_data(o, static_cast<std::size_t>(o.points));
  const auto rows = analytic::empirical_concentration_curve(l.train, grid, o.within_class);
  io::RunManifest manifest(o.out, "concentration");
  io::CsvTable t({"m", "epsilon", "mass", "clamped"});
  io::Series s{"empirical", {}, {}};
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.m), format_double(r.epsilon), format_double(r.mass), r.clamped ? "1" : "0"});
    s.x.push_back(r.epsilon);
    s.y.push_back(r.mass);
  }
  manifest.write_artifact("concentration.csv", t.str());
  maybe_plot(o, manifest, "concentration.svg", "Empirical concentration", "epsilon", "mass", {s});
  return finish(manifest, c, start, false, out);
}

int cmd_gen_data(const Command& c, std::ostream& out, std::ostream&) {
  Options o = c.opt;
  const auto start = Clock::now();
  const Loaded l = load_data(o, train_count(o));
  io::RunManifest manifest(o.out, "gen-data");
  const auto tmp = std::filesystem::path(o.out);
  // Written through the dataset writer, then recorded with their checksums.
  for (const auto& [name, set] : {std::pair<std::string, const data::LabeledDataset*>{"train.csv", &l.train},
                                  std::pair<std::string, const data::LabeledDataset*>{"test.csv", &l.test}}) {
    const auto scratch = tmp / (name + ".part");
    data::write_dataset_csv(scratch, *set);
    std::ifstream in(scratch, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    in.close();
    std::filesystem::remove(scratch);
    manifest.write_artifact(name, buf.str());
  }
  out << "train " << l.train.size() << " test " << l.test.size() << " dim " << l.train.dim << "\n";
  return finish(manifest, c, start, false, out);
}

// Reads key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

bool given(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Config values become --key=value arguments placed before the command line
// ones; keys also given on the command line are left to the command line.
std::vector<std::string> expand_config(const Command& cmd, const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(path)) {
    const auto* entry = cmd.find(key);
    if (entry == nullptr || key == "config") throw ArgumentError("config: unknown key '" + key + "'");
    if (given(args, key)) continue;
    if (entry->is_flag) {
      if (value == "true" || value == "1") {
        injected.push_back("--" + key);
      } else if (value != "false" && value != "0") {
        throw ArgumentError("config: flag '" + key + "' needs true or false");
      }
    } else {
      injected.push_back("--" + key + "=" + value);
    }
  }
  injected.insert(injected.end(), args.begin(), args.end());
  return injected;
}

}  // namespace

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified robustness for union-of-subspaces classifiers"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  using Handler = int (*)(const Command&, std::ostream&, std::ostream&);
  struct Entry {
    std::unique_ptr<Command> cmd;
    Handler handler;
  };
  std::vector<Entry> commands;
  auto make = [&](const std::string& name, const std::string& desc, Handler h) -> Command& {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, desc);
    add_run_flags(*c, name);
    commands.push_back({std::move(c), h});
    return *commands.back().cmd;
  };

  {
    auto& c = make("certify", "Dual classifier predictions with per-point certificates", cmd_certify);
    add_data_flags(c);
    add_dual_flags(c);
    c.flag("exact-radius", c.opt.exact_radius, "Compute the exact l2 radius (small dimensions only)");
    c.add("max-vertices", c.opt.max_vertices, "Vertex budget for the exact radius");
  }
  {
    auto& c = make("attack-proj", "Projected gradient attack restricted to each certificate", cmd_attack_proj);
    c.opt.eps_grid = "0:0.5:6";
    add_data_flags(c);
    add_dual_flags(c);
    c.add("eps-grid", c.opt.eps_grid, "Attack budgets: comma list or start:stop:count");
    c.add("steps", c.opt.steps, "Attack steps T");
    c.add("step-size", c.opt.step_size, "Step size (0: 2.5 eps / T)");
    c.add("target", c.opt.target, "Attacked classifier: dual, ns or smoothed-ns");
    c.add("ns-dim", c.opt.ns_dim, "Nearest-subspace dimension (0: automatic)");
    c.add("face-margin", c.opt.face_margin, "Margin kept from the facets of the face");
    c.add("grad-samples", c.opt.grad_samples, "Noise samples for the smoothed gradient");
    c.add("sigma", c.opt.sigma, "Smoothing noise level");
    c.add("n0", c.opt.n0, "Smoothing selection samples");
  }
  {
    auto& c = make("attack-bb", "Decision-based boundary attack", cmd_attack_bb);
    c.opt.eps_grid = "0:0.5:6";
    add_data_flags(c);
    add_dual_flags(c);
    c.add("eps-grid", c.opt.eps_grid, "Budgets for the robust accuracy curve");
    c.add("steps", c.opt.steps, "Attack rounds");
    c.add("target", c.opt.target, "Attacked classifier: dual or ns");
    c.add("ns-dim", c.opt.ns_dim, "Nearest-subspace dimension (0: automatic)");
    c.add("init-trials", c.opt.init_trials, "Random initialization trials");
    c.add("probes", c.opt.probes, "Gradient sign probes per round");
  }
  {
    auto& c = make("rs-curve", "Randomized smoothing certified accuracy curve", cmd_rs_curve);
    add_data_flags(c);
    add_dual_flags(c);
    c.add("base", c.opt.base, "Base classifier: dual or ns");
    c.add("ns-dim", c.opt.ns_dim, "Nearest-subspace dimension (0: automatic)");
    c.add("sigma", c.opt.sigma, "Noise level");
    c.add("n0", c.opt.n0, "Selection samples");
    c.add("n", c.opt.n, "Estimation samples");
    c.add("confidence", c.opt.confidence, "Confidence level");
    c.add("radii", c.opt.radii, "Radii: comma list or start:stop:count");
  }
  {
    auto& c = make("sphere", "Sphere example risk curve", cmd_sphere);
    c.opt.eps_grid = "0:1.5:151";
    c.add("dim", c.opt.dim, "Dimension n");
    c.add("theta0", c.opt.theta0, "Cap half-angle theta0");
    c.add("psi", c.opt.psi, "Density profile: constant or exp");
    c.add("branch", c.opt.branch, "Class-2 formula past the equator: geometric or as-displayed");
    c.add("eps-grid", c.opt.eps_grid, "Perturbation angles: comma list or start:stop:count");
  }
  {
    auto& c = make("cube", "Cube example bound and Monte-Carlo risk", cmd_cube);
    c.opt.eps_grid = "0,0.05,0.1";
    c.opt.dim = 10;
    c.add("dim", c.opt.dim, "Dimension n");
    c.add("alphas", c.opt.alphas, "Values of alpha");
    c.add("eps-grid", c.opt.eps_grid, "Perturbation sizes");
    c.add("samples", c.opt.samples, "Monte-Carlo samples per row");
  }
  {
    auto& c = make("concentration", "Empirical concentration curve of a dataset", cmd_concentration);
    add_data_flags(c);
    c.add("points", c.opt.points, "Training points used");
    c.add("m-grid", c.opt.m_grid, "Set sizes m: comma list or start:stop:count");
    c.flag("within-class", c.opt.within_class, "Rank points by within-class neighbour distance");
  }
  {
    auto& c = make("gen-data", "Write train/test CSVs", cmd_gen_data);
    add_data_flags(c);
    c.add("dict-size", c.opt.dict_size, "Training points when --train-points is 0");
  }
  for (auto& e : commands) {
    const std::string name = e.cmd->app->get_name();
    if (name == "attack-proj" || name == "attack-bb" || name == "rs-curve" || name == "sphere" || name == "cube" ||
        name == "concentration") {
      e.cmd->flag("plot", e.cmd->opt.plot, "Also write an SVG plot");
    }
  }

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    if (!args.empty()) {
      for (auto& e : commands) {
        if (e.cmd->app->get_name() == args[0]) {
          std::vector<std::string> rest(args.begin() + 1, args.end());
          rest = expand_config(*e.cmd, rest);
          rest.insert(rest.begin(), args[0]);
          args = std::move(rest);
          break;
        }
      }
    }
    std::vector<const char*> cargs{argc > 0 ? argv[0] : "polycert"};
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  for (auto& e : commands) {
    if (!e.cmd->app->parsed()) continue;
    try {
      return e.handler(*e.cmd, out, err);
    } catch (const ArgumentError& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitUsage;
    } catch (const ParseError& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace polycert::cli

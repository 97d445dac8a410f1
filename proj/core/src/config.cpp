#include "ntkcond/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ntkcond/deep_mlp.hpp"
#include "ntkcond/linear_system.hpp"
#include "ntkcond/quadratic_system.hpp"
#include "ntkcond/random.hpp"
#include "ntkcond/shallow_net.hpp"
#include "ntkcond/sparse_additive.hpp"
#include "ntkcond/transformed_system.hpp"

namespace ntkcond {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSweep:
      return "kernel-drift-sweep";
    case ExperimentKind::kCertify:
      return "certify";
    case ExperimentKind::kTrain:
      return "train";
    case ExperimentKind::kProbe:
      return "probe";
    case ExperimentKind::kLinearize:
      return "linearize-compare";
    case ExperimentKind::kBounds:
      return "bounds";
  }
  return "certify";
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::kSweep, ExperimentKind::kCertify, ExperimentKind::kTrain,
                 ExperimentKind::kProbe, ExperimentKind::kLinearize, ExperimentKind::kBounds}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("kind: unknown experiment kind '" + s + "'");
}

namespace {

// One JSON object with a closed set of keys.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(label("") + "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(label(key) + "wrong type (" + e.what() + ")");
    }
  }

  void get(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    if (!it->is_number()) throw ConfigError(label(key) + "expected a number");
    out = it->get<double>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(label(it.key()) + "unknown key");
    }
  }

  std::string label(const std::string& key) const {
    std::string p = path_;
    if (!key.empty()) p += (p.empty() ? "" : ".") + key;
    return p.empty() ? std::string() : p + ": ";
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_model(const json& j, ModelConfig& m) {
  Section s(j, "model");
  s.get("family", m.family);
  s.get("width", m.width);
  s.get("widths", m.widths);
  s.get("activation", m.activation);
  s.get("output_activation", m.output_activation);
  s.get("parameterization", m.parameterization);
  s.get("depth", m.depth);
  s.get("input_dim", m.input_dim);
  s.get("sparsity", m.sparsity);
  s.get("matrix", m.matrix);
  s.get("diagonal", m.diagonal);
  s.get("params", m.params);
  s.get("scale", m.scale);
  s.get("seed", m.seed);
  s.get("initial", m.initial);
  s.finish();
}

void parse_dataset(const json& j, DatasetConfig& d) {
  Section s(j, "dataset");
  s.get("n", d.n);
  s.get("seed", d.seed);
  s.get("duplicate_inputs", d.duplicate_inputs);
  s.get("targets", d.targets);
  s.finish();
}

void parse_optimizer(const json& j, OptimizerConfig& o) {
  Section s(j, "optimizer");
  if (const json* step = s.child("step")) {
    if (step->is_number()) {
      o.step = "user";
      o.step_value = step->get<double>();
    } else if (step->is_string()) {
      o.step = step->get<std::string>();
      if (o.step != "thm4.2c" && o.step != "cor5.1") {
        throw ConfigError("optimizer.step: expected a number, \"thm4.2c\" or \"cor5.1\"");
      }
    } else {
      throw ConfigError("optimizer.step: expected a number or a string");
    }
  }
  s.get("mu", o.mu);
  s.get("mu_fraction", o.mu_fraction);
  s.get("step_scale", o.step_scale);
  s.get("max_iters", o.max_iters);
  s.get("loss_tol", o.loss_tol);
  s.get("method", o.method);
  s.get("batch_size", o.batch_size);
  s.get("kernel_stride", o.kernel_stride);
  s.get("log_every", o.log_every);
  s.get("gamma_safety", o.gamma_safety);
  s.get("delta", o.delta);
  s.finish();
}

void parse_sweep(const json& j, SweepConfig& w) {
  Section s(j, "sweep");
  s.get("seeds", w.seeds);
  s.get("families", w.families);
  s.get("kernel_stride", w.kernel_stride);
  s.get("allow_large", w.allow_large);
  s.finish();
}

void parse_ball(const json& j, BallConfig& b) {
  Section s(j, "ball");
  s.get("radius", b.radius);
  s.get("samples", b.samples);
  s.get("seed", b.seed);
  s.finish();
}

void parse_probe(const json& j, ProbeConfig& p) {
  Section s(j, "probe");
  s.get("radii", p.radii);
  s.get("directions", p.directions);
  s.get("seed", p.seed);
  s.get("train_iters", p.train_iters);
  s.finish();
}

void parse_linearize(const json& j, LinearizeConfig& l) {
  Section s(j, "linearize");
  s.get("epsilon", l.epsilon);
  s.get("iters", l.iters);
  s.finish();
}

void parse_bounds(const json& j, BoundsConfig& b) {
  Section s(j, "bounds");
  s.get("depth", b.depth);
  s.get("width", b.width);
  s.get("radius", b.radius);
  s.get("l_sigma", b.l_sigma);
  s.get("beta_sigma", b.beta_sigma);
  s.get("c0", b.c0);
  s.get("c_x", b.c_x);
  s.get("s0", b.s0);
  s.get("delta", b.delta);
  s.get("n", b.n);
  s.get("mu", b.mu);
  s.get("lambda_min", b.lambda_min);
  s.get("sparsity", b.sparsity);
  s.get("beta_alpha", b.beta_alpha);
  s.get("s_p", b.s_p);
  s.finish();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  Section s(doc, "");
  std::string kind;
  s.get("kind", kind);
  if (kind.empty()) throw ConfigError("kind: missing experiment kind");
  c.kind = parse_kind(kind);
  if (const json* j = s.child("model")) parse_model(*j, c.model);
  if (const json* j = s.child("dataset")) parse_dataset(*j, c.dataset);
  if (const json* j = s.child("optimizer")) parse_optimizer(*j, c.optimizer);
  if (const json* j = s.child("sweep")) parse_sweep(*j, c.sweep);
  if (const json* j = s.child("ball")) parse_ball(*j, c.ball);
  if (const json* j = s.child("probe")) parse_probe(*j, c.probe);
  if (const json* j = s.child("linearize")) parse_linearize(*j, c.linearize);
  if (const json* j = s.child("bounds")) parse_bounds(*j, c.bounds);
  if (const json* j = s.child("output")) {
    Section o(*j, "output");
    o.get("dir", c.output_dir);
    o.finish();
  }
  s.get("threads", c.threads);
  s.finish();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void validate_config(const ExperimentConfig& c) {
  const auto& m = c.model;
  static const std::set<std::string> families{"linear", "product", "quadratic",
                                              "shallow", "deep",    "sparse"};
  if (!families.count(m.family)) throw ConfigError("model.family: unknown family '" + m.family + "'");
  if (m.width < 1) throw ConfigError("model.width: must be positive");
  for (std::size_t k = 0; k < m.widths.size(); ++k) {
    if (m.widths[k] < 1) throw ConfigError("model.widths: entries must be positive");
    if (k > 0 && m.widths[k] <= m.widths[k - 1]) {
      throw ConfigError("model.widths: must be strictly increasing");
    }
  }
  if (m.parameterization != "full" && m.parameterization != "hidden-only") {
    throw ConfigError("model.parameterization: expected \"full\" or \"hidden-only\"");
  }
  try {
    (void)Activation::parse(m.activation);
    (void)OutputMap::parse(m.output_activation);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (c.dataset.n < 1) throw ConfigError("dataset.n: must be positive");
  if (c.sweep.seeds.empty()) throw ConfigError("sweep.seeds: need at least one seed");
  if (c.optimizer.method != "gd" && c.optimizer.method != "sgd") {
    throw ConfigError("optimizer.method: expected \"gd\" or \"sgd\"");
  }
  if (c.optimizer.step_value && !(*c.optimizer.step_value > 0.0)) {
    throw ConfigError("optimizer.step: must be positive");
  }
  if (c.optimizer.max_iters < 0) throw ConfigError("optimizer.max_iters: must be nonnegative");
  if (c.threads < 1) throw ConfigError("threads: must be positive");
  if (c.kind == ExperimentKind::kSweep) {
    if (m.widths.empty()) throw ConfigError("model.widths: a sweep needs a width list");
    if (!c.sweep.allow_large) {
      for (Index w : m.widths) {
        if (w > 10000) {
          throw ConfigError("model.widths: widths above 10^4 need sweep.allow_large = true "
                            "(kernel snapshots cost O(n^2 m) each)");
        }
      }
    }
    for (const auto& f : c.sweep.families) {
      if (f != "linear-output" && f != "tanh-output" && f != "swish-output") {
        throw ConfigError("sweep.families: unknown family '" + f + "'");
      }
    }
  }
}

json config_to_json(const ExperimentConfig& c) {
  const auto& m = c.model;
  const auto& o = c.optimizer;
  const auto& b = c.bounds;
  json j;
  j["kind"] = to_string(c.kind);
  j["model"] = {{"family", m.family},
                {"width", m.width},
                {"widths", m.widths},
                {"activation", m.activation},
                {"output_activation", m.output_activation},
                {"parameterization", m.parameterization},
                {"depth", m.depth},
                {"input_dim", m.input_dim},
                {"sparsity", m.sparsity},
                {"matrix", m.matrix},
                {"diagonal", m.diagonal},
                {"params", m.params},
                {"scale", m.scale},
                {"seed", m.seed},
                {"initial", m.initial}};
  j["dataset"] = {{"n", c.dataset.n},
                  {"seed", c.dataset.seed},
                  {"duplicate_inputs", c.dataset.duplicate_inputs},
                  {"targets", c.dataset.targets}};
  j["optimizer"] = {{"step", o.step_value ? json(*o.step_value) : json(o.step)},
                    {"mu", optional_number(o.mu)},
                    {"mu_fraction", o.mu_fraction},
                    {"step_scale", o.step_scale},
                    {"max_iters", o.max_iters},
                    {"loss_tol", o.loss_tol},
                    {"method", o.method},
                    {"batch_size", o.batch_size},
                    {"kernel_stride", o.kernel_stride},
                    {"log_every", o.log_every},
                    {"gamma_safety", o.gamma_safety},
                    {"delta", o.delta}};
  j["sweep"] = {{"seeds", c.sweep.seeds},
                {"families", c.sweep.families},
                {"kernel_stride", c.sweep.kernel_stride},
                {"allow_large", c.sweep.allow_large}};
  j["ball"] = {{"radius", c.ball.radius}, {"samples", c.ball.samples}, {"seed", c.ball.seed}};
  j["probe"] = {{"radii", c.probe.radii},
                {"directions", c.probe.directions},
                {"seed", c.probe.seed},
                {"train_iters", c.probe.train_iters}};
  j["linearize"] = {{"epsilon", c.linearize.epsilon}, {"iters", c.linearize.iters}};
  j["bounds"] = {{"depth", b.depth},     {"width", b.width},
                 {"radius", b.radius},   {"l_sigma", b.l_sigma},
                 {"beta_sigma", b.beta_sigma}, {"c0", b.c0},
                 {"c_x", b.c_x},         {"s0", b.s0},
                 {"delta", b.delta},     {"n", optional_number(b.n)},
                 {"mu", optional_number(b.mu)}, {"lambda_min", optional_number(b.lambda_min)},
                 {"sparsity", optional_number(b.sparsity)},
                 {"beta_alpha", optional_number(b.beta_alpha)},
                 {"s_p", optional_number(b.s_p)}};
  j["output"] = {{"dir", c.output_dir}};
  j["threads"] = c.threads;
  return j;
}

namespace {

Dataset make_dataset(const ExperimentConfig& c, Index input_dim) {
  Dataset d = systems::synthetic_dataset(c.dataset.n, input_dim, c.dataset.seed);
  if (c.dataset.duplicate_inputs && d.size() >= 2) {
    d.inputs[1] = d.inputs[0];
    d.targets[1] = d.targets[0];
  }
  if (!c.dataset.targets.empty()) {
    if (static_cast<Index>(c.dataset.targets.size()) != d.size()) {
      throw ConfigError("dataset.targets: length must equal dataset.n");
    }
    d.targets = Eigen::Map<const Vector>(c.dataset.targets.data(), d.size());
  }
  return d;
}

Vector explicit_or(const ModelConfig& m, Vector fallback) {
  if (m.initial.empty()) return fallback;
  if (static_cast<Index>(m.initial.size()) != fallback.size()) {
    throw ConfigError("model.initial: length " + std::to_string(m.initial.size()) +
                      " does not match the parameter count " + std::to_string(fallback.size()));
  }
  return Eigen::Map<const Vector>(m.initial.data(), fallback.size());
}

Vector fixed_targets(const ExperimentConfig& c, Index n, Vector fallback) {
  if (c.dataset.targets.empty()) return fallback;
  if (static_cast<Index>(c.dataset.targets.size()) != n) {
    throw ConfigError("dataset.targets: length must equal the number of equations " +
                      std::to_string(n));
  }
  return Eigen::Map<const Vector>(c.dataset.targets.data(), n);
}

}  // namespace

Problem build_problem(const ExperimentConfig& c, std::optional<Index> width) {
  const auto& m = c.model;
  const Index w = width.value_or(m.width);
  Problem p;
  if (m.family == "linear") {
    Matrix a;
    if (!m.matrix.empty()) {
      const Index rows = static_cast<Index>(m.matrix.size());
      const Index cols = static_cast<Index>(m.matrix.front().size());
      a.resize(rows, cols);
      for (Index i = 0; i < rows; ++i) {
        if (static_cast<Index>(m.matrix[static_cast<std::size_t>(i)].size()) != cols) {
          throw ConfigError("model.matrix: rows have different lengths");
        }
        for (Index k = 0; k < cols; ++k) a(i, k) = m.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
    } else if (!m.diagonal.empty()) {
      a = Eigen::Map<const Vector>(m.diagonal.data(), static_cast<Index>(m.diagonal.size())).asDiagonal();
    } else {
      throw ConfigError("model: the linear family needs model.matrix or model.diagonal");
    }
    p.system = std::make_shared<LinearSystem>(a);
    Rng rng(m.seed);
    p.w0 = explicit_or(m, rng.normal_vector(a.cols()));
    p.targets = fixed_targets(c, a.rows(), Vector::Zero(a.rows()));
  } else if (m.family == "product") {
    p.system = std::make_shared<QuadraticSystem>(QuadraticSystem::bilinear_product());
    p.w0 = explicit_or(m, Vector::Ones(2));
    p.targets = fixed_targets(c, 1, Vector::Ones(1));
  } else if (m.family == "quadratic") {
    p.system = std::make_shared<QuadraticSystem>(
        QuadraticSystem::random(c.dataset.n, m.params, m.scale, m.seed));
    Rng rng(derive_seed(m.seed, 1));
    p.w0 = explicit_or(m, rng.normal_vector(m.params));
    p.targets = fixed_targets(c, c.dataset.n, Vector::Zero(c.dataset.n));
  } else if (m.family == "shallow") {
    p.dataset = make_dataset(c, 1);
    ShallowNetSpec spec{w, Activation::parse(m.activation),
                        m.parameterization == "full" ? ShallowParameterization::kFull
                                                     : ShallowParameterization::kHiddenOnly};
    ShallowInit init = ShallowNet::gaussian_init(spec, m.seed);
    p.system = std::make_shared<ShallowNet>(spec, p.dataset.scalar_inputs(), init.output_signs);
    p.w0 = explicit_or(m, init.params);
    p.targets = p.dataset.targets;
  } else if (m.family == "deep") {
    p.dataset = make_dataset(c, m.input_dim);
    DeepMlpSpec spec{m.depth, m.input_dim, w, Activation::parse(m.activation)};
    p.system = std::make_shared<DeepMlp>(spec, p.dataset.inputs);
    p.w0 = explicit_or(m, DeepMlp::gaussian_init(spec, m.seed));
    p.targets = p.dataset.targets;
  } else if (m.family == "sparse") {
    p.dataset = make_dataset(c, 1);
    SparseAdditiveSpec spec{w, m.sparsity, Activation::parse(m.activation), std::nullopt};
    p.system = std::make_shared<SparseAdditiveModel>(spec, p.dataset.scalar_inputs(), m.seed);
    p.w0 = explicit_or(m, SparseAdditiveModel::gaussian_init(spec, derive_seed(m.seed, 1)));
    p.targets = p.dataset.targets;
  } else {
    throw ConfigError("model.family: unknown family '" + m.family + "'");
  }
  if (m.output_activation != "identity") {
    p.system = std::make_shared<TransformedSystem>(p.system, OutputMap::parse(m.output_activation));
  }
  return p;
}

}  // namespace ntkcond

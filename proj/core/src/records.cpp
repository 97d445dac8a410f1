#include "ntkcond/records.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef NTKCOND_VERSION
#define NTKCOND_VERSION "unknown"
#endif

namespace ntkcond {

using nlohmann::json;

std::string version() { return NTKCOND_VERSION; }

RunSummary summarize(const KernelChangeSeries& s) {
  return RunSummary{s.family,     s.width, s.seed,      s.max_delta,    s.converged,
                    s.iterations, s.final_loss, s.step, s.step_rule, s.lambda_min_k0};
}

namespace io {

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::runtime_error("expected a number in result record, got " + j.dump());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

json optional_json(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return to_double(j);
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = to_double(j.at(static_cast<std::size_t>(i)));
  return v;
}

json to_json(const ConditioningCertificate& c) {
  json samples = json::array();
  for (const auto& s : c.samples) {
    samples.push_back({{"lambda_min_k", number(s.lambda_min_k)},
                       {"lambda_max_k", number(s.lambda_max_k)},
                       {"lambda_max_loss", number(s.lambda_max_loss)},
                       {"pl_ratio", number(s.pl_ratio)},
                       {"residual_norm", number(s.residual_norm)}});
  }
  return {{"center", vector_json(c.center)},
          {"radius", number(c.radius)},
          {"mu_hat", number(c.mu_hat)},
          {"lambda_max_loss_hat", number(c.lambda_max_loss_hat)},
          {"kappa_hat", optional_json(c.kappa_hat)},
          {"pl_ratio_min", number(c.pl_ratio_min)},
          {"residual_norm_max", number(c.residual_norm_max)},
          {"jacobian_norm_max", number(c.jacobian_norm_max)},
          {"sample_count", c.sample_count},
          {"seed", c.seed},
          {"rank_tolerance", number(c.rank_tolerance)},
          {"uniformly_conditioned", c.uniformly_conditioned},
          {"samples", samples},
          {"version", version()}};
}

ConditioningCertificate certificate_from_json(const json& j) {
  ConditioningCertificate c;
  c.center = vector_from_json(j.at("center"));
  c.radius = to_double(j.at("radius"));
  c.mu_hat = to_double(j.at("mu_hat"));
  c.lambda_max_loss_hat = to_double(j.at("lambda_max_loss_hat"));
  c.kappa_hat = optional_from(j.at("kappa_hat"));
  c.pl_ratio_min = to_double(j.at("pl_ratio_min"));
  c.residual_norm_max = to_double(j.at("residual_norm_max"));
  c.jacobian_norm_max = to_double(j.at("jacobian_norm_max"));
  c.sample_count = j.at("sample_count").get<Index>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.rank_tolerance = to_double(j.at("rank_tolerance"));
  c.uniformly_conditioned = j.at("uniformly_conditioned").get<bool>();
  for (const auto& s : j.at("samples")) {
    c.samples.push_back({to_double(s.at("lambda_min_k")), to_double(s.at("lambda_max_k")),
                         to_double(s.at("lambda_max_loss")), to_double(s.at("pl_ratio")),
                         to_double(s.at("residual_norm"))});
  }
  return c;
}

json to_json(const ConstantsEstimate& e) {
  return {{"lipschitz", number(e.lipschitz)},
          {"smoothness", number(e.smoothness)},
          {"gamma", number(e.gamma)},
          {"safety_factor", number(e.safety_factor)},
          {"max_jacobian_norm", number(e.max_jacobian_norm)},
          {"max_hessian_norm", number(e.max_hessian_norm)},
          {"max_equation_smoothness", number(e.max_equation_smoothness)},
          {"sample_count", e.sample_count},
          {"seed", e.seed},
          {"radius", number(e.radius)}};
}

ConstantsEstimate constants_from_json(const json& j) {
  ConstantsEstimate e;
  e.lipschitz = to_double(j.at("lipschitz"));
  e.smoothness = to_double(j.at("smoothness"));
  e.gamma = to_double(j.at("gamma"));
  e.safety_factor = to_double(j.at("safety_factor"));
  e.max_jacobian_norm = to_double(j.at("max_jacobian_norm"));
  e.max_hessian_norm = to_double(j.at("max_hessian_norm"));
  e.max_equation_smoothness = to_double(j.at("max_equation_smoothness"));
  e.sample_count = j.at("sample_count").get<Index>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.radius = to_double(j.at("radius"));
  return e;
}

json to_json(const GdPrescription& p) {
  return {{"step", number(p.step)},
          {"radius", number(p.radius)},
          {"mu", number(p.mu)},
          {"provenance", to_string(p.provenance)},
          {"lipschitz", number(p.lipschitz)},
          {"smoothness", number(p.smoothness)},
          {"residual_norm", number(p.residual_norm)},
          {"rounds", p.rounds},
          {"radius_stable", p.radius_stable}};
}

GdPrescription prescription_from_json(const json& j) {
  GdPrescription p;
  p.step = to_double(j.at("step"));
  p.radius = to_double(j.at("radius"));
  p.mu = to_double(j.at("mu"));
  p.provenance = parse_provenance(j.at("provenance").get<std::string>());
  p.lipschitz = to_double(j.at("lipschitz"));
  p.smoothness = to_double(j.at("smoothness"));
  p.residual_norm = to_double(j.at("residual_norm"));
  p.rounds = j.at("rounds").get<Index>();
  p.radius_stable = j.at("radius_stable").get<bool>();
  return p;
}

json to_json(const Trajectory& t) {
  json recs = json::array();
  for (const auto& r : t.records) {
    recs.push_back({{"t", r.t},
                    {"loss", number(r.loss)},
                    {"dist_from_init", number(r.dist_from_init)},
                    {"grad_norm", number(r.grad_norm)},
                    {"lambda_min_k", optional_json(r.lambda_min_k)}});
  }
  return {{"records", recs},
          {"final_w", vector_json(t.final_w)},
          {"converged", t.converged},
          {"stop_reason", t.stop_reason},
          {"iterations", t.iterations}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  for (const auto& r : j.at("records")) {
    t.records.push_back({r.at("t").get<Index>(), to_double(r.at("loss")),
                         to_double(r.at("dist_from_init")), to_double(r.at("grad_norm")),
                         optional_from(r.at("lambda_min_k"))});
  }
  t.final_w = vector_from_json(j.at("final_w"));
  t.converged = j.at("converged").get<bool>();
  t.stop_reason = j.at("stop_reason").get<std::string>();
  t.iterations = j.at("iterations").get<Index>();
  return t;
}

json to_json(const RateReport& r) {
  json margins = json::array();
  for (double m : r.margins) margins.push_back(number(m));
  return {{"holds", r.holds},
          {"first_violation", r.first_violation ? json(*r.first_violation) : json(nullptr)},
          {"rate", number(r.rate)},
          {"margins", margins}};
}

RateReport rate_report_from_json(const json& j) {
  RateReport r;
  r.holds = j.at("holds").get<bool>();
  if (!j.at("first_violation").is_null()) r.first_violation = j.at("first_violation").get<Index>();
  r.rate = to_double(j.at("rate"));
  for (const auto& m : j.at("margins")) r.margins.push_back(to_double(m));
  return r;
}

json to_json(const CurvatureProbeResult& r) {
  json per = json::array();
  for (const auto& o : r.per_radius) {
    per.push_back({{"radius", number(o.radius)},
                   {"found_negative", o.found_negative},
                   {"curvature", number(o.curvature)},
                   {"witness_delta", vector_json(o.witness_delta)},
                   {"witness_direction", vector_json(o.witness_direction)},
                   {"offsets_tried", o.offsets_tried}});
  }
  json radii = json::array();
  for (double x : r.probe_radii) radii.push_back(number(x));
  return {{"found_negative", r.found_negative},
          {"witness_delta", vector_json(r.witness_delta)},
          {"witness_direction", vector_json(r.witness_direction)},
          {"curvature", number(r.curvature)},
          {"probe_radii", radii},
          {"per_radius", per}};
}

CurvatureProbeResult probe_from_json(const json& j) {
  CurvatureProbeResult r;
  r.found_negative = j.at("found_negative").get<bool>();
  r.witness_delta = vector_from_json(j.at("witness_delta"));
  r.witness_direction = vector_from_json(j.at("witness_direction"));
  r.curvature = to_double(j.at("curvature"));
  for (const auto& x : j.at("probe_radii")) r.probe_radii.push_back(to_double(x));
  for (const auto& o : j.at("per_radius")) {
    RadiusOutcome out;
    out.radius = to_double(o.at("radius"));
    out.found_negative = o.at("found_negative").get<bool>();
    out.curvature = to_double(o.at("curvature"));
    out.witness_delta = vector_from_json(o.at("witness_delta"));
    out.witness_direction = vector_from_json(o.at("witness_direction"));
    out.offsets_tried = o.at("offsets_tried").get<Index>();
    r.per_radius.push_back(std::move(out));
  }
  return r;
}

json to_json(const KernelChangeReport& r) {
  json changes = json::array();
  for (double c : r.changes) changes.push_back(number(c));
  return {{"epsilon", number(r.epsilon)},   {"lipschitz", number(r.lipschitz)},
          {"hessian_norm", number(r.hessian_norm)}, {"radius", number(r.radius)},
          {"changes", changes},              {"passed", r.passed},
          {"all_passed", r.all_passed}};
}

json to_json(const DivergenceReport& r) {
  json out;
  json gap = json::array(), step = json::array(), ln = json::array(), ll = json::array();
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    gap.push_back(number(r.gap[k]));
    step.push_back(number(r.step_gap[k]));
    ln.push_back(number(r.loss_nonlinear[k]));
    ll.push_back(number(r.loss_linearized[k]));
  }
  out["t"] = r.t;
  out["gap"] = gap;
  out["step_gap"] = step;
  out["loss_nonlinear"] = ln;
  out["loss_linearized"] = ll;
  out["sup_gap"] = number(r.sup_gap);
  if (r.condition_17) {
    const auto& c = *r.condition_17;
    out["condition_17"] = {{"satisfied", c.satisfied},         {"lhs", number(c.lhs)},
                           {"rhs", number(c.rhs)},             {"plain_rhs", number(c.plain_rhs)},
                           {"plain_satisfied", c.plain_satisfied}, {"epsilon", number(c.epsilon)},
                           {"lipschitz", number(c.lipschitz)}, {"radius", number(c.radius)},
                           {"mu", number(c.mu)},               {"residual_norm", number(c.residual_norm)}};
  } else {
    out["condition_17"] = nullptr;
  }
  out["final_w"] = vector_json(r.final_w);
  out["final_w_lin"] = vector_json(r.final_w_lin);
  return out;
}

DivergenceReport divergence_from_json(const json& j) {
  DivergenceReport r;
  r.t = j.at("t").get<std::vector<Index>>();
  for (const auto& x : j.at("gap")) r.gap.push_back(to_double(x));
  for (const auto& x : j.at("step_gap")) r.step_gap.push_back(to_double(x));
  for (const auto& x : j.at("loss_nonlinear")) r.loss_nonlinear.push_back(to_double(x));
  for (const auto& x : j.at("loss_linearized")) r.loss_linearized.push_back(to_double(x));
  r.sup_gap = to_double(j.at("sup_gap"));
  if (!j.at("condition_17").is_null()) {
    const auto& c = j.at("condition_17");
    Condition17 k;
    k.satisfied = c.at("satisfied").get<bool>();
    k.lhs = to_double(c.at("lhs"));
    k.rhs = to_double(c.at("rhs"));
    k.plain_rhs = to_double(c.at("plain_rhs"));
    k.plain_satisfied = c.at("plain_satisfied").get<bool>();
    k.epsilon = to_double(c.at("epsilon"));
    k.lipschitz = to_double(c.at("lipschitz"));
    k.radius = to_double(c.at("radius"));
    k.mu = to_double(c.at("mu"));
    k.residual_norm = to_double(c.at("residual_norm"));
    r.condition_17 = k;
  }
  r.final_w = vector_from_json(j.at("final_w"));
  r.final_w_lin = vector_from_json(j.at("final_w_lin"));
  return r;
}

json to_json(const bounds::DeepBounds& b) {
  json cb = json::array();
  for (double x : b.c_b) cb.push_back(number(x));
  return {{"lipschitz", number(b.lipschitz)}, {"hessian_scale", number(b.hessian_scale)},
          {"c_prime", number(b.c_prime)},     {"c_b", cb},
          {"depth", b.depth}};
}

json to_json(const RunSummary& r) {
  return {{"family", r.family},
          {"width", r.width},
          {"seed", r.seed},
          {"max_delta", number(r.max_delta)},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"final_loss", number(r.final_loss)},
          {"step", number(r.step)},
          {"step_rule", r.step_rule},
          {"lambda_min_k0", number(r.lambda_min_k0)}};
}

RunSummary run_summary_from_json(const json& j) {
  RunSummary r;
  r.family = j.at("family").get<std::string>();
  r.width = j.at("width").get<Index>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.max_delta = to_double(j.at("max_delta"));
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<Index>();
  r.final_loss = to_double(j.at("final_loss"));
  r.step = to_double(j.at("step"));
  r.step_rule = j.at("step_rule").get<std::string>();
  r.lambda_min_k0 = to_double(j.at("lambda_min_k0"));
  return r;
}

json to_json(const SweepSummary& s) {
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r));
  json widths = json::array();
  for (const auto& w : s.widths) {
    widths.push_back({{"family", w.family},
                      {"width", w.width},
                      {"mean_max_delta", number(w.mean_max_delta)},
                      {"median_max_delta", number(w.median_max_delta)},
                      {"runs", w.runs},
                      {"non_converged", w.non_converged}});
  }
  return {{"config", s.config}, {"version", s.version}, {"runs", runs}, {"widths", widths}};
}

SweepSummary sweep_summary_from_json(const json& j) {
  SweepSummary s;
  s.config = j.at("config");
  s.version = j.at("version").get<std::string>();
  for (const auto& r : j.at("runs")) s.runs.push_back(run_summary_from_json(r));
  for (const auto& w : j.at("widths")) {
    s.widths.push_back({w.at("family").get<std::string>(), w.at("width").get<Index>(),
                        to_double(w.at("mean_max_delta")), to_double(w.at("median_max_delta")),
                        w.at("runs").get<Index>(), w.at("non_converged").get<Index>()});
  }
  return s;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return json::parse(in);
}

void write_trajectory_csv(const std::string& path, const Trajectory& t) {
  auto out = open_out(path);
  out << "t,loss,dist_from_init,grad_norm,lambda_min_K\n";
  for (const auto& r : t.records) {
    out << r.t << ',' << format_double(r.loss) << ',' << format_double(r.dist_from_init) << ','
        << format_double(r.grad_norm) << ',';
    if (r.lambda_min_k) out << format_double(*r.lambda_min_k);
    out << '\n';
  }
}

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<TrajectoryRecord> recs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 5) throw std::runtime_error("malformed trajectory row in '" + path + "'");
    TrajectoryRecord r;
    r.t = std::stoll(c[0]);
    r.loss = parse_double(c[1]);
    r.dist_from_init = parse_double(c[2]);
    r.grad_norm = parse_double(c[3]);
    if (!c[4].empty()) r.lambda_min_k = parse_double(c[4]);
    recs.push_back(r);
  }
  return recs;
}

void write_gap_csv(const std::string& path, const DivergenceReport& r) {
  auto out = open_out(path);
  out << "t,gap,loss_nonlinear,loss_linearized,step_gap\n";
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    out << r.t[k] << ',' << format_double(r.gap[k]) << ',' << format_double(r.loss_nonlinear[k])
        << ',' << format_double(r.loss_linearized[k]) << ',' << format_double(r.step_gap[k])
        << '\n';
  }
}

void write_series_csv(const std::string& path, const KernelChangeSeries& s) {
  auto out = open_out(path);
  out << "t,delta_k\n";
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    out << s.t[k] << ',' << format_double(s.delta[k]) << '\n';
  }
}

KernelChangeSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  KernelChangeSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 2) throw std::runtime_error("malformed series row in '" + path + "'");
    s.t.push_back(std::stoll(c[0]));
    s.delta.push_back(parse_double(c[1]));
  }
  for (double d : s.delta) s.max_delta = std::max(s.max_delta, d);
  return s;
}

void write_dat(const std::string& path, const std::string& title,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  out << "# " << title << '\n' << '#';
  for (const auto& c : columns) out << ' ' << c;
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << format_double(row[k]);
    out << '\n';
  }
}

}  // namespace io
}  // namespace ntkcond

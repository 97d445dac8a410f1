#include "ntkcond/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>

#include "ntkcond/bounds.hpp"
#include "ntkcond/conditioning.hpp"
#include "ntkcond/hessian.hpp"
#include "ntkcond/linearize.hpp"
#include "ntkcond/optimize.hpp"
#include "ntkcond/records.hpp"
#include "ntkcond/sweep.hpp"
#include "ntkcond/transformed_system.hpp"

namespace ntkcond {

using nlohmann::json;
namespace fs = std::filesystem;

void apply_overrides(ExperimentConfig& c, const CommandOverrides& o) {
  if (o.out_dir) c.output_dir = *o.out_dir;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads: must be positive");
    c.threads = *o.threads;
  }
  if (o.seed) {
    c.model.seed = *o.seed;
    c.sweep.seeds = {*o.seed};
    c.ball.seed = *o.seed;
    c.probe.seed = *o.seed;
  }
}

namespace {

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  return (fs::path(c.output_dir) / name).string();
}

std::string fmt(double v) { return io::format_double(v); }

double default_mu(const ExperimentConfig& c, const TangentKernel& k0) {
  if (c.optimizer.mu) {
    if (!(*c.optimizer.mu > 0.0)) throw ContractError("optimizer.mu must be positive");
    return *c.optimizer.mu;
  }
  // Same numerical rank test as the certificate: roundoff-level lambda_min is zero.
  const double floor = static_cast<double>(std::max(k0.matrix.rows(), k0.anchor.size())) *
                       std::numeric_limits<double>::epsilon() * std::sqrt(std::max(k0.lambda_max, 0.0));
  const double mu = c.optimizer.mu_fraction * k0.lambda_min;
  if (!(mu > 0.0) || k0.lambda_min <= floor * floor) {
    throw PreconditionError(
        "lambda_min(K(w0)) is not positive, so no PL* constant is available at w0; "
        "set optimizer.mu or a numeric optimizer.step");
  }
  return mu;
}

// Step that is stable for the linear model at w0, corrected by sup|phi'|^2
// for composed systems whose kernel can grow with phi'.
double linear_model_step(const System& sys, const Vector& w0) {
  if (const auto* t = dynamic_cast<const TransformedSystem*>(&sys)) {
    const double b = t->output_map().derivative_bound;
    const TangentKernel kb = tangent_kernel(t->base(), w0);
    return 1.0 / (b * b * kb.lambda_max);
  }
  return 1.0 / tangent_kernel(sys, w0).lambda_max;
}

}  // namespace

int cmd_certify(const ExperimentConfig& c, std::ostream& log) {
  const Problem p = build_problem(c);
  CertifyOptions opts;
  opts.samples = c.ball.samples;
  opts.seed = c.ball.seed;
  const ConditioningCertificate cert = certify_ball(*p.system, p.w0, c.ball.radius, p.targets, opts);
  json doc = io::to_json(cert);
  doc["config"] = config_to_json(c);
  io::write_json(out_path(c, "certificate.json"), doc);
  log << "certify: " << p.system->name() << " R=" << fmt(c.ball.radius)
      << " samples=" << cert.sample_count << " mu_hat=" << fmt(cert.mu_hat)
      << " lambda_max(H_L)=" << fmt(cert.lambda_max_loss_hat)
      << " kappa_hat=" << (cert.kappa_hat ? fmt(*cert.kappa_hat) : std::string("undefined"))
      << " pl_min=" << fmt(cert.pl_ratio_min) << '\n';
  if (!cert.uniformly_conditioned) {
    log << "certify: not uniformly conditioned (mu_hat <= " << fmt(cert.rank_tolerance) << ")\n";
    return kExitNotConditioned;
  }
  return kExitOk;
}

int cmd_train(const ExperimentConfig& c, std::ostream& log) {
  const Problem p = build_problem(c);
  const System& sys = *p.system;
  const Index n = sys.num_outputs();
  const auto& o = c.optimizer;
  const TangentKernel k0 = tangent_kernel(sys, p.w0);
  const double r0 = (sys.evaluate(p.w0) - p.targets).norm();

  json report;
  report["config"] = config_to_json(c);
  report["version"] = version();
  Trajectory traj;
  double eta = 0.0;

  if (o.method == "gd") {
    GdPrescription pres;
    if (o.step_value) {
      pres.step = *o.step_value;
      pres.provenance = Provenance::kUser;
      pres.mu = o.mu.value_or(std::max(k0.lambda_min, 0.0));
      pres.residual_norm = r0;
    } else if (o.step == "thm4.2c") {
      AutoPrescribeOptions ao;
      ao.samples = c.ball.samples;
      ao.seed = c.ball.seed;
      pres = prescribe_gd_auto(sys, p.w0, p.targets, default_mu(c, k0), ao);
    } else {
      EstimateOptions eo;
      eo.samples = c.ball.samples;
      eo.seed = c.ball.seed;
      const ConstantsEstimate est = estimate_constants(sys, p.w0, c.ball.radius, eo);
      pres = prescribe_cor51(est.lipschitz, n, k0.lambda_min, default_mu(c, k0), r0);
    }
    eta = pres.step * o.step_scale;
    report["prescription"] = io::to_json(pres);
    GdOptions gd;
    gd.max_iters = o.max_iters;
    gd.loss_tol = o.loss_tol;
    gd.kernel_stride = o.kernel_stride;
    traj = run_gd(sys, p.w0, p.targets, eta, gd);
    const double mu_check = min_recorded_lambda(traj).value_or(pres.mu);
    report["mu_hat"] = io::number(mu_check);
    if (eta * mu_check > 0.0 && eta * mu_check < 1.0 && traj.stop_reason != "diverged") {
      report["rate"] = io::to_json(verify_rate(traj, eta, mu_check));
    } else {
      report["rate"] = nullptr;
    }
    if (pres.radius > 0.0) {
      report["within_radius"] = max_distance(traj) <= pres.radius;
    }
  } else {
    EstimateOptions eo;
    eo.samples = c.ball.samples;
    eo.seed = c.ball.seed;
    eo.safety_factor = o.gamma_safety;
    eo.targets = p.targets;
    const ConstantsEstimate est = estimate_constants(sys, p.w0, c.ball.radius, eo);
    const double mu = default_mu(c, k0);
    const double l0 = 0.5 * r0 * r0;
    const SgdPrescription sp = prescribe_sgd(n, mu, est.gamma, o.batch_size, l0, o.delta);
    eta = (o.step_value ? *o.step_value : sp.step) * o.step_scale;
    report["prescription"] = {{"step", io::number(sp.step)},
                              {"radius", io::number(sp.radius)},
                              {"rate", io::number(sp.rate)},
                              {"gamma", io::number(est.gamma)},
                              {"mu", io::number(mu)}};
    SgdOptions so;
    so.batch_size = o.batch_size;
    so.max_iters = o.max_iters;
    so.loss_tol = o.loss_tol;
    so.seed = c.model.seed;
    so.log_every = o.log_every;
    traj = run_sgd(sys, p.w0, p.targets, eta, so);
    const double rate = 1.0 - mu * static_cast<double>(o.batch_size) * eta / static_cast<double>(n);
    std::vector<Index> ts;
    std::vector<double> ls;
    for (const auto& r : traj.records) {
      ts.push_back(r.t);
      ls.push_back(r.loss);
    }
    if (rate > 0.0 && rate < 1.0 && traj.stop_reason != "diverged") {
      report["rate"] = io::to_json(verify_rate_series(ts, ls, rate, 1.5));
    } else {
      report["rate"] = nullptr;
    }
  }

  io::write_trajectory_csv(out_path(c, "trajectory.csv"), traj);
  report["step"] = io::number(eta);
  report["stop_reason"] = traj.stop_reason;
  report["converged"] = traj.converged;
  report["iterations"] = traj.iterations;
  report["final_loss"] = traj.records.empty() ? json(nullptr) : io::number(traj.records.back().loss);
  report["max_distance"] = io::number(max_distance(traj));
  io::write_json(out_path(c, "report.json"), report);

  log << "train: " << sys.name() << " method=" << o.method << " step=" << fmt(eta)
      << " stop=" << traj.stop_reason << " iterations=" << traj.iterations;
  if (!traj.records.empty()) log << " final_loss=" << fmt(traj.records.back().loss);
  if (report.contains("prescription") && report["prescription"].contains("provenance")) {
    log << " provenance=" << report["prescription"]["provenance"].get<std::string>();
  }
  if (!report["rate"].is_null()) log << " rate_holds=" << (report["rate"]["holds"].get<bool>() ? "true" : "false");
  log << '\n';
  return traj.stop_reason == "diverged" ? kExitDiverged : kExitOk;
}

int cmd_probe(const ExperimentConfig& c, std::ostream& log) {
  const Problem p = build_problem(c);
  const System& sys = *p.system;
  GaussNewtonOptions gn;
  gn.max_iters = c.probe.train_iters;
  const Trajectory fit = run_gauss_newton(sys, p.w0, p.targets, gn);
  ProbeOptions po;
  po.directions_per_radius = c.probe.directions;
  po.seed = c.probe.seed;
  const CurvatureProbeResult res = nonconvexity_probe(sys, fit.final_w, p.targets, c.probe.radii, po);
  json doc;
  doc["config"] = config_to_json(c);
  doc["version"] = version();
  doc["fit"] = {{"iterations", fit.iterations},
                {"final_loss", io::number(fit.records.back().loss)},
                {"stop_reason", fit.stop_reason}};
  doc["result"] = io::to_json(res);
  io::write_json(out_path(c, "probe.json"), doc);
  log << "probe: " << sys.name() << " fitted loss=" << fmt(fit.records.back().loss)
      << " found_negative=" << (res.found_negative ? "true" : "false");
  for (const auto& r : res.per_radius) {
    log << " [r=" << fmt(r.radius) << " curvature=" << fmt(r.curvature) << "]";
  }
  log << '\n';
  return kExitOk;
}

int cmd_linearize(const ExperimentConfig& c, std::ostream& log) {
  std::vector<std::optional<Index>> widths;
  if (c.model.widths.empty()) {
    widths.push_back(std::nullopt);
  } else {
    for (Index w : c.model.widths) widths.emplace_back(w);
  }
  json doc;
  doc["config"] = config_to_json(c);
  doc["version"] = version();
  doc["runs"] = json::array();
  for (const auto& w : widths) {
    const Problem p = build_problem(c, w);
    const System& sys = *p.system;
    const double eta = (c.optimizer.step_value ? *c.optimizer.step_value : linear_model_step(sys, p.w0)) *
                       c.optimizer.step_scale;
    CompareOptions co;
    co.epsilon = c.linearize.epsilon;
    co.seed = c.ball.seed;
    co.mu = c.optimizer.mu;
    const DivergenceReport rep = compare_dynamics(sys, p.w0, p.targets, eta, c.linearize.iters, co);
    const std::string tag = w ? "_m" + std::to_string(*w) : std::string();
    io::write_gap_csv(out_path(c, "gap" + tag + ".csv"), rep);
    json run = io::to_json(rep);
    run.erase("final_w");
    run.erase("final_w_lin");
    run["width"] = w ? json(*w) : json(nullptr);
    run["step"] = io::number(eta);
    doc["runs"].push_back(run);
    log << "linearize: " << sys.name() << (w ? " m=" + std::to_string(*w) : std::string())
        << " step=" << fmt(eta) << " sup_gap=" << fmt(rep.sup_gap);
    if (rep.condition_17) {
      log << " condition17=" << (rep.condition_17->satisfied ? "holds" : "fails") << " ("
          << fmt(rep.condition_17->lhs) << " vs " << fmt(rep.condition_17->rhs) << ")";
    }
    log << '\n';
  }
  io::write_json(out_path(c, "linearize.json"), doc);
  return kExitOk;
}

int cmd_bounds(const ExperimentConfig& c, std::ostream& log) {
  const auto& b = c.bounds;
  bounds::DeepBoundsInput in;
  in.depth = b.depth;
  in.width = b.width;
  in.radius = b.radius;
  in.l_sigma = b.l_sigma;
  in.beta_sigma = b.beta_sigma;
  in.c0 = b.c0;
  in.c_x = b.c_x;
  in.s0 = b.s0;
  const bounds::DeepBounds d = bounds::deep_bounds(in);
  json doc;
  doc["config"] = config_to_json(c);
  doc["version"] = version();
  doc["deep"] = io::to_json(d);
  doc["deep"]["init_output_bound"] = io::number(d.init_output_bound(b.delta));
  log << "bounds: lipschitz=" << fmt(d.lipschitz) << " hessian_scale=" << fmt(d.hessian_scale)
      << " init_output_bound(delta=" << fmt(b.delta) << ")=" << fmt(d.init_output_bound(b.delta));
  if (b.n && b.mu && b.lambda_min) {
    const double wr = bounds::width_requirement(*b.n, *b.mu, *b.lambda_min, b.depth);
    doc["width_requirement"] = io::number(wr);
    log << " width_requirement=" << fmt(wr);
  }
  if (b.sparsity && b.beta_alpha && b.s_p) {
    const double sb = bounds::sparse_hessian_bound(*b.sparsity, *b.beta_alpha, *b.s_p);
    doc["sparse_hessian_bound"] = io::number(sb);
    log << " sparse_hessian_bound=" << fmt(sb);
  }
  log << '\n';
  io::write_json(out_path(c, "bounds.json"), doc);
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& c, std::ostream& log) {
  const Dataset data = systems::synthetic_dataset(c.dataset.n, c.dataset.seed);
  DriftRunOptions opts;
  opts.max_iters = c.optimizer.max_iters;
  opts.loss_tol = c.optimizer.loss_tol;
  opts.kernel_stride = c.sweep.kernel_stride;
  opts.step = c.optimizer.step_value;
  opts.mu_fraction = c.optimizer.mu_fraction;
  opts.step_scale = c.optimizer.step_scale;
  const auto cells = sweep_cells(c.sweep.families, c.model.widths, c.sweep.seeds);
  const auto runs = run_sweep(cells, data, opts, c.threads, [&log](const KernelChangeSeries& s) {
    log << "sweep: " << s.family << " m=" << s.width << " seed=" << s.seed
        << " max_dK=" << io::format_double(s.max_delta) << " iterations=" << s.iterations
        << (s.converged ? "" : " (not converged)") << std::endl;
  });

  SweepSummary summary;
  summary.config = config_to_json(c);
  summary.version = version();
  for (const auto& r : runs) {
    io::write_series_csv(out_path(c, "runs/" + r.family + "_m" + std::to_string(r.width) + "_s" +
                                         std::to_string(r.seed) + ".csv"),
                         r);
    summary.runs.push_back(summarize(r));
  }
  summary.widths = summarize_widths(summary.runs);
  io::write_json(out_path(c, "summary.json"), io::to_json(summary));

  // Right panel: mean/median max Delta K against width, one column pair per family.
  std::vector<std::string> cols{"width"};
  for (const auto& f : c.sweep.families) {
    cols.push_back("mean_" + f);
    cols.push_back("median_" + f);
  }
  std::vector<std::vector<double>> rows;
  for (Index w : c.model.widths) {
    std::vector<double> row{static_cast<double>(w)};
    for (const auto& f : c.sweep.families) {
      for (const auto& s : summary.widths) {
        if (s.family == f && s.width == w) {
          row.push_back(s.mean_max_delta);
          row.push_back(s.median_max_delta);
        }
      }
    }
    rows.push_back(row);
  }
  io::write_dat(out_path(c, "fig2_right.dat"), "max_t Delta K_t against width", cols, rows);

  // Left panel: Delta K_t per iteration at the largest width, first seed.
  const Index wmax = c.model.widths.back();
  for (const auto& r : runs) {
    if (r.width != wmax || r.seed != c.sweep.seeds.front()) continue;
    std::vector<std::vector<double>> series;
    for (std::size_t k = 0; k < r.t.size(); ++k) series.push_back({static_cast<double>(r.t[k]), r.delta[k]});
    io::write_dat(out_path(c, "fig2_left_" + r.family + ".dat"),
                  "Delta K_t for " + r.family + " at m=" + std::to_string(wmax), {"t", "delta_k"},
                  series);
  }

  for (const auto& s : summary.widths) {
    log << "summary: " << s.family << " m=" << s.width << " mean=" << fmt(s.mean_max_delta)
        << " median=" << fmt(s.median_max_delta) << " runs=" << s.runs;
    if (s.non_converged) log << " non_converged=" << s.non_converged;
    log << '\n';
  }
  return kExitOk;
}

int run_command(const std::string& name, const ExperimentConfig& config, std::ostream& log,
                std::ostream& err) {
  try {
    if (name == "sweep") return cmd_sweep(config, log);
    if (name == "certify") return cmd_certify(config, log);
    if (name == "train") return cmd_train(config, log);
    if (name == "probe") return cmd_probe(config, log);
    if (name == "linearize") return cmd_linearize(config, log);
    if (name == "bounds") return cmd_bounds(config, log);
    err << "unknown subcommand '" << name << "'\n";
    return kExitError;
  } catch (const CapacityError& e) {
    err << "capacity: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const PreconditionError& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const UnsupportedOperation& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace ntkcond

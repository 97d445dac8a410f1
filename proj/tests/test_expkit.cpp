#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ntkcond/commands.hpp"
#include "ntkcond/config.hpp"
#include "ntkcond/hessian.hpp"
#include "ntkcond/records.hpp"
#include "ntkcond/sweep.hpp"
#include "support.hpp"

namespace ntkcond {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ntkcond-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config_of(const std::string& text) { return parse_config(json::parse(text)); }

TEST(Config, DefaultsAreFilledAndReported) {
  const ExperimentConfig c = config_of(R"({"kind": "certify"})");
  EXPECT_EQ(c.model.family, "shallow");
  EXPECT_EQ(c.sweep.seeds.size(), 10u);
  EXPECT_EQ(c.optimizer.max_iters, 100000);
  const json j = config_to_json(c);
  for (const char* key : {"kind", "model", "dataset", "optimizer", "sweep", "ball", "probe", "linearize",
                          "bounds", "output", "threads"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(config_to_json(parse_config(j)), j);
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(config_of(R"({"kind": "certify", "modle": {}})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "certify", "model": {"widht": 3}})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "nope"})"), ConfigError);
  EXPECT_THROW(config_of(R"({})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "certify", "model": {"width": "ten"}})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "kernel-drift-sweep", "model": {"widths": [100, 30]}})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "kernel-drift-sweep", "model": {"widths": [30, 100000]}})"), ConfigError);
  EXPECT_NO_THROW(config_of(
      R"({"kind": "kernel-drift-sweep", "model": {"widths": [30, 100000]}, "sweep": {"allow_large": true}})"));
  EXPECT_THROW(config_of(R"({"kind": "certify", "sweep": {"seeds": []}})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "train", "optimizer": {"step": -1}})"), ConfigError);
  EXPECT_THROW(config_of(R"({"kind": "train", "optimizer": {"step": "fast"}})"), ConfigError);
  const auto c = config_of(R"({"kind": "train", "optimizer": {"step": 0.5}})");
  ASSERT_TRUE(c.optimizer.step_value);
  EXPECT_EQ(*c.optimizer.step_value, 0.5);
}

TEST(Config, BuildProblemFamilies) {
  auto c = config_of(R"({"kind": "certify", "model": {"family": "linear", "diagonal": [1, 2], "initial": [1, 1]}})");
  Problem p = build_problem(c);
  EXPECT_EQ(p.system->evaluate(p.w0), testing::vec({1, 2}));
  c = config_of(R"({"kind": "certify", "model": {"family": "product"}})");
  p = build_problem(c);
  EXPECT_EQ(p.system->evaluate(p.w0)(0), 1.0);
  c = config_of(R"({"kind": "certify", "model": {"family": "shallow", "width": 7, "output_activation": "tanh3"}})");
  p = build_problem(c);
  EXPECT_EQ(p.system->name(), "shallow+tanh3");
  EXPECT_EQ(p.w0.size(), 21);
  EXPECT_EQ(build_problem(c, 9).w0.size(), 27);
  c = config_of(R"({"kind": "certify", "model": {"family": "deep", "width": 5, "depth": 3, "input_dim": 2}, "dataset": {"n": 4}})");
  EXPECT_EQ(build_problem(c).system->num_outputs(), 4);
  c = config_of(R"({"kind": "certify", "model": {"family": "linear"}})");
  EXPECT_THROW(build_problem(c), ConfigError);
}

TEST(Records, NumberEncodingRoundTrips) {
  for (double v : {0.0, -1.5, 1e-300, 0.1, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()}) {
    EXPECT_EQ(io::to_double(json::parse(io::number(v).dump())), v);
  }
  EXPECT_TRUE(std::isnan(io::to_double(io::number(std::nan("")))));
  EXPECT_EQ(std::stod(io::format_double(0.1)), 0.1);
  EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Records, CertificateRoundTrip) {
  const testing::Case c = testing::shallow_case(20, 4, "tanh");
  const auto cert = certify_ball(*c.system, c.w, 0.5, c.targets, {3, 1, {}, {}});
  const fs::path dir = scratch("cert");
  io::write_json((dir / "c.json").string(), io::to_json(cert));
  const auto back = io::certificate_from_json(io::read_json((dir / "c.json").string()));
  EXPECT_EQ(back.center, cert.center);
  EXPECT_EQ(back.mu_hat, cert.mu_hat);
  EXPECT_EQ(back.kappa_hat, cert.kappa_hat);
  EXPECT_EQ(back.rank_tolerance, cert.rank_tolerance);
  EXPECT_EQ(back.samples.size(), cert.samples.size());
  EXPECT_EQ(back.samples[2].pl_ratio, cert.samples[2].pl_ratio);
  EXPECT_EQ(io::to_json(back), io::to_json(cert));
}

TEST(Records, TrajectoryJsonAndCsvRoundTrip) {
  const testing::Case c = testing::shallow_case(20, 4, "tanh");
  GdOptions o;
  o.max_iters = 25;
  o.loss_tol = -1;
  o.kernel_stride = 5;
  const Trajectory t = run_gd(*c.system, c.w, c.targets, 0.1, o);
  const Trajectory back = io::trajectory_from_json(json::parse(io::to_json(t).dump()));
  EXPECT_EQ(io::to_json(back), io::to_json(t));
  const fs::path dir = scratch("traj");
  io::write_trajectory_csv((dir / "t.csv").string(), t);
  const auto rows = io::read_trajectory_csv((dir / "t.csv").string());
  ASSERT_EQ(rows.size(), t.records.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].t, t.records[k].t);
    EXPECT_EQ(rows[k].loss, t.records[k].loss);
    EXPECT_EQ(rows[k].grad_norm, t.records[k].grad_norm);
    EXPECT_EQ(rows[k].lambda_min_k, t.records[k].lambda_min_k);
  }
  const std::string text = slurp(dir / "t.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,loss,dist_from_init,grad_norm,lambda_min_K");
}

TEST(Records, OtherReportsRoundTrip) {
  const auto p = prescribe_thm42c(2, 1, 3, 1);
  EXPECT_EQ(io::to_json(io::prescription_from_json(io::to_json(p))), io::to_json(p));
  RateReport r;
  r.holds = false;
  r.first_violation = 4;
  r.margins = {0.5, 2.0};
  r.rate = 0.9;
  EXPECT_EQ(io::to_json(io::rate_report_from_json(io::to_json(r))), io::to_json(r));
  const auto probe = nonconvexity_probe(QuadraticSystem::bilinear_product(), testing::vec({1, 1}), testing::vec({1}), {0.01});
  EXPECT_EQ(io::to_json(io::probe_from_json(json::parse(io::to_json(probe).dump()))), io::to_json(probe));
  const testing::Case c = testing::shallow_case(10, 3, "tanh");
  const auto est = estimate_constants(*c.system, c.w, 0.5, {3, 0, 1.1, std::nullopt, {}});
  EXPECT_EQ(io::to_json(io::constants_from_json(io::to_json(est))), io::to_json(est));
  const auto div = compare_dynamics(*c.system, c.w, c.targets, 0.1, 20);
  EXPECT_EQ(io::to_json(io::divergence_from_json(json::parse(io::to_json(div).dump()))), io::to_json(div));
}

Dataset drift_data() { return systems::synthetic_dataset(20, 0); }

TEST(Sweep, SeriesInvariantsAndCsvRoundTrip) {
  DriftRunOptions o;
  o.max_iters = 300;
  const auto s = run_kernel_drift("tanh-output", 30, 1, drift_data(), o);
  ASSERT_FALSE(s.delta.empty());
  EXPECT_EQ(s.delta.front(), 0.0);
  EXPECT_EQ(s.max_delta, *std::max_element(s.delta.begin(), s.delta.end()));
  EXPECT_EQ(s.t.back(), s.iterations);
  const fs::path dir = scratch("series");
  io::write_series_csv((dir / "s.csv").string(), s);
  const auto back = io::read_series_csv((dir / "s.csv").string());
  EXPECT_EQ(back.t, s.t);
  EXPECT_EQ(back.delta, s.delta);
}

TEST(Sweep, ParallelResultsMatchSerialByteForByte) {
  DriftRunOptions o;
  o.max_iters = 200;
  const auto cells = sweep_cells({"linear-output", "swish-output"}, {20, 40}, {0, 1});
  ASSERT_EQ(cells.size(), 8u);
  EXPECT_EQ(cells[1].seed, 1u);
  EXPECT_EQ(cells[2].width, 40);
  const auto serial = run_sweep(cells, drift_data(), o, 1);
  const auto parallel = run_sweep(cells, drift_data(), o, 3);
  const fs::path dir = scratch("par");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    io::write_series_csv((dir / "a.csv").string(), serial[k]);
    io::write_series_csv((dir / "b.csv").string(), parallel[k]);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(serial[k].family, cells[k].family);
  }
}

TEST(Sweep, SummaryMeansAndMedians) {
  std::vector<RunSummary> runs;
  const std::vector<double> vals{0.3, 0.1, 0.2, 0.7};
  for (std::size_t k = 0; k < vals.size(); ++k) {
    RunSummary r;
    r.family = "linear-output";
    r.width = 30;
    r.seed = k;
    r.max_delta = vals[k];
    r.converged = k != 2;
    runs.push_back(r);
  }
  const auto w = summarize_widths(runs);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NEAR(w[0].mean_max_delta, 0.325, 1e-15);
  EXPECT_NEAR(w[0].median_max_delta, 0.25, 1e-15);
  EXPECT_EQ(w[0].non_converged, 1);
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}), -1.0, 1e-12);
}

TEST(Sweep, DriftNetworkFamilies) {
  const auto lin = drift_network("linear-output", 10, {0.1, 0.5}, 0);
  const auto tan = drift_network("tanh-output", 10, {0.1, 0.5}, 0);
  EXPECT_EQ(lin.w0, tan.w0);
  EXPECT_EQ(lin.w0.size(), 30);
  const Vector f = lin.system->evaluate(lin.w0);
  const Vector g = tan.system->evaluate(tan.w0);
  for (Index i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(g(i), 3 * std::tanh(f(i)));
  EXPECT_FALSE(lin.system->second_order_supported());
  EXPECT_THROW(drift_network("cubic-output", 10, {0.1}, 0), ContractError);
}

class CommandTest : public ::testing::Test {
 protected:
  int run(const std::string& sub, const std::string& text, const std::string& name) {
    ExperimentConfig c = config_of(text);
    dir = scratch("cmd-" + name);
    c.output_dir = dir.string();
    log.str("");
    err.str("");
    return run_command(sub, c, log, err);
  }
  fs::path dir;
  std::ostringstream log;
  std::ostringstream err;
};

TEST_F(CommandTest, CertifyExitCodes) {
  EXPECT_EQ(run("certify", R"({"kind": "certify", "model": {"family": "linear", "diagonal": [1, 1, 1]}, "ball": {"samples": 4}})", "id"),
            kExitOk);
  const json cert = io::read_json((dir / "certificate.json").string());
  EXPECT_NEAR(io::to_double(cert["kappa_hat"]), 1.0, 1e-9);
  EXPECT_EQ(run("certify", R"({"kind": "certify", "model": {"family": "shallow", "width": 1000}, "dataset": {"n": 5}, "ball": {"radius": 0.1, "samples": 4}})", "sh"),
            kExitOk);
  EXPECT_EQ(run("certify", R"({"kind": "certify", "model": {"family": "shallow", "width": 200}, "dataset": {"n": 6, "duplicate_inputs": true}, "ball": {"radius": 0.1, "samples": 4}})", "dup"),
            kExitNotConditioned);
  EXPECT_EQ(run("certify", R"({"kind": "certify", "model": {"family": "linear", "diagonal": [1]}, "dataset": {"n": 1}, "ball": {"samples": 1}})", "one"),
            kExitOk);
}

TEST_F(CommandTest, CapacityErrorExitCode) {
  EXPECT_EQ(run("certify", R"({"kind": "certify", "model": {"family": "shallow", "width": 2}, "dataset": {"n": 10001}, "ball": {"samples": 1}})", "cap"),
            kExitCapacity);
  EXPECT_NE(err.str().find("capacity"), std::string::npos);
}

TEST_F(CommandTest, TrainReportsAndDivergence) {
  EXPECT_EQ(run("train", R"({"kind": "train", "model": {"family": "linear", "diagonal": [1, 2], "initial": [1, 1]}, "optimizer": {"kernel_stride": 1, "max_iters": 500, "loss_tol": 1e-12}})", "lin"),
            kExitOk);
  const json rep = io::read_json((dir / "report.json").string());
  EXPECT_TRUE(rep["rate"]["holds"].get<bool>());
  EXPECT_EQ(rep["prescription"]["provenance"], "thm4.2c");
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
  EXPECT_EQ(run("train", R"({"kind": "train", "model": {"family": "linear", "diagonal": [1, 100], "initial": [1, 1]}, "optimizer": {"step_scale": 10, "max_iters": 1000}})", "div"),
            kExitDiverged);
  const auto rows = io::read_trajectory_csv((dir / "trajectory.csv").string());
  EXPECT_LT(rows.size(), 1000u);
  EXPECT_EQ(run("train", R"({"kind": "train", "model": {"family": "shallow", "width": 20}, "dataset": {"n": 3, "duplicate_inputs": true}})", "pre"),
            kExitPrecondition);
}

TEST_F(CommandTest, TrainSgd) {
  EXPECT_EQ(run("train", R"({"kind": "train", "model": {"family": "linear", "matrix": [[1, 0.5], [0, 1]], "initial": [1, -1]}, "optimizer": {"method": "sgd", "max_iters": 500, "loss_tol": 1e-10}})", "sgd"),
            kExitOk);
  const json rep = io::read_json((dir / "report.json").string());
  EXPECT_TRUE(rep["rate"]["holds"].get<bool>());
}

TEST_F(CommandTest, ProbeLinearizeBounds) {
  EXPECT_EQ(run("probe", R"({"kind": "probe", "model": {"family": "product"}, "probe": {"radii": [0.01]}})", "probe"), kExitOk);
  EXPECT_TRUE(io::read_json((dir / "probe.json").string())["result"]["found_negative"].get<bool>());
  EXPECT_EQ(run("probe", R"({"kind": "probe", "model": {"family": "product"}, "probe": {"train_iters": 0}, "dataset": {"targets": [3]}})", "probe-pre"),
            kExitPrecondition);
  EXPECT_EQ(run("linearize", R"({"kind": "linearize-compare", "model": {"family": "linear", "diagonal": [1, 2]}, "linearize": {"iters": 50}})", "lin"),
            kExitOk);
  EXPECT_EQ(io::to_double(io::read_json((dir / "linearize.json").string())["runs"][0]["sup_gap"]), 0.0);
  EXPECT_EQ(run("bounds", R"({"kind": "bounds", "bounds": {"depth": 2, "width": 100}})", "b"), kExitOk);
  EXPECT_EQ(io::to_double(io::read_json((dir / "bounds.json").string())["deep"]["lipschitz"]), 8.0);
  EXPECT_EQ(run("bounds", R"({"kind": "bounds", "bounds": {"depth": 2, "width": 4, "radius": 3}})", "b-pre"),
            kExitPrecondition);
  EXPECT_NE(err.str().find("R^2"), std::string::npos);
}

TEST_F(CommandTest, SweepOutputsAndSummaryIntegrity) {
  const std::string cfg = R"({"kind": "kernel-drift-sweep", "model": {"widths": [20, 40]},
      "optimizer": {"max_iters": 200}, "sweep": {"seeds": [0, 1, 2], "families": ["linear-output", "tanh-output"]}})";
  ASSERT_EQ(run("sweep", cfg, "sweep"), kExitOk);
  const fs::path first = dir;
  const json summary = io::read_json((dir / "summary.json").string());
  const SweepSummary s = io::sweep_summary_from_json(summary);
  EXPECT_EQ(io::to_json(s), summary);
  ASSERT_EQ(s.widths.size(), 4u);
  for (const auto& w : s.widths) {
    double sum = 0;
    for (std::uint64_t seed : {0, 1, 2}) {
      const auto series = io::read_series_csv(
          (dir / "runs" / (w.family + "_m" + std::to_string(w.width) + "_s" + std::to_string(seed) + ".csv")).string());
      sum += *std::max_element(series.delta.begin(), series.delta.end());
    }
    EXPECT_NEAR(w.mean_max_delta, sum / 3, 1e-12);
  }
  EXPECT_TRUE(fs::exists(dir / "fig2_right.dat"));
  EXPECT_TRUE(fs::exists(dir / "fig2_left_linear-output.dat"));
  EXPECT_TRUE(fs::exists(dir / "fig2_left_tanh-output.dat"));
  // Same configuration again: byte-identical CSVs.
  const std::string a = slurp(first / "runs" / "tanh-output_m40_s2.csv");
  ASSERT_EQ(run("sweep", cfg, "sweep2"), kExitOk);
  EXPECT_EQ(slurp(dir / "runs" / "tanh-output_m40_s2.csv"), a);
}

TEST(Commands, OverridesAndUnknownSubcommand) {
  ExperimentConfig c = config_of(R"({"kind": "certify"})");
  apply_overrides(c, {std::string("/tmp/x"), Index(4), std::uint64_t(42)});
  EXPECT_EQ(c.output_dir, "/tmp/x");
  EXPECT_EQ(c.threads, 4);
  EXPECT_EQ(c.model.seed, 42u);
  EXPECT_EQ(c.sweep.seeds, std::vector<std::uint64_t>{42});
  std::ostringstream log, err;
  EXPECT_EQ(run_command("frobnicate", c, log, err), kExitError);
}

}  // namespace
}  // namespace ntkcond

#include "ntkcond/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/linalg.hpp"
#include "ntkcond/optimize.hpp"
#include "ntkcond/random.hpp"
#include "ntkcond/shallow_net.hpp"
#include "ntkcond/transformed_system.hpp"

namespace ntkcond {

DriftNetwork drift_network(const std::string& family, Index width, const std::vector<double>& inputs,
                           std::uint64_t seed) {
  OutputMap phi;
  if (family == "linear-output") {
    phi = OutputMap::identity();
  } else if (family == "tanh-output") {
    phi = OutputMap::parse("tanh3");
  } else if (family == "swish-output") {
    phi = OutputMap::parse("swish");
  } else {
    throw ContractError("drift_network: unknown family '" + family + "'");
  }
  const ShallowNetSpec spec{width, Activation(ActivationKind::kRelu), ShallowParameterization::kFull};
  const ShallowInit init = ShallowNet::gaussian_init(spec, derive_seed(seed, static_cast<std::uint64_t>(width)));
  DriftNetwork net;
  net.base = std::make_shared<ShallowNet>(spec, inputs);
  net.system = family == "linear-output" ? net.base : std::make_shared<TransformedSystem>(net.base, phi);
  net.output_map = phi;
  net.w0 = init.params;
  return net;
}

namespace {
// J J^T through a symmetric rank update, half the flops of the full product.
Matrix gram(const Matrix& j) {
  Matrix k = Matrix::Zero(j.rows(), j.rows());
  k.selfadjointView<Eigen::Lower>().rankUpdate(j);
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}
}  // namespace

Index default_kernel_stride(Index width) { return width <= 10000 ? 1 : 10; }

KernelChangeSeries run_kernel_drift(const std::string& family, Index width, std::uint64_t seed,
                                    const Dataset& data, const DriftRunOptions& options) {
  data.validate();
  const DriftNetwork net = drift_network(family, width, data.scalar_inputs(), seed);
  const System& sys = *net.system;
  const Index stride = options.kernel_stride > 0 ? options.kernel_stride : default_kernel_stride(width);

  const Matrix j0 = sys.jacobian(net.w0);
  const Matrix k0 = gram(j0);
  const double k0_norm = k0.norm();
  require(k0_norm > 0.0, "run_kernel_drift: initial kernel vanishes");

  KernelChangeSeries s;
  s.family = family;
  s.width = width;
  s.seed = seed;
  const TangentKernel k0_info = kernel_from_jacobian(j0, net.w0);
  s.lambda_min_k0 = k0_info.lambda_min;

  double eta = 0.0;
  if (options.step) {
    eta = *options.step;
    s.step_rule = "user";
  } else {
    // Chain rule: ||J_phi(w)|| <= sup|phi'| ||J_base(w)||.
    const double lf = net.output_map.derivative_bound * linalg::spectral_norm(net.base->jacobian(net.w0));
    const double r0 = (sys.evaluate(net.w0) - data.targets).norm();
    const double sigma_max = std::sqrt(std::max(k0_info.lambda_max, 0.0));
    const double rank_floor = static_cast<double>(std::max(j0.rows(), j0.cols())) *
                              std::numeric_limits<double>::epsilon() * sigma_max;
    if (k0_info.lambda_min > rank_floor * rank_floor) {
      const double mu = options.mu_fraction * k0_info.lambda_min;
      eta = prescribe_cor51(lf, sys.num_outputs(), k0_info.lambda_min, mu, r0).step;
      s.step_rule = "cor5.1";
    } else {
      eta = 1.0 / (lf * lf);
      s.step_rule = "cor5.1-mu0";
    }
  }
  eta *= options.step_scale;
  s.step = eta;

  GdOptions gd;
  gd.max_iters = options.max_iters;
  gd.loss_tol = options.loss_tol;
  gd.record_stride = std::max<Index>(options.max_iters, 1);
  Index last_t = -1;
  gd.observer = [&](Index t, const Vector& w) {
    last_t = t;
    if (t % stride != 0) return;
    const Matrix j = sys.jacobian(w);
    s.t.push_back(t);
    s.delta.push_back((gram(j) - k0).norm() / k0_norm);
  };
  const Trajectory traj = run_gd(sys, net.w0, data.targets, eta, gd);
  if (last_t >= 0 && (s.t.empty() || s.t.back() != last_t)) {
    const Matrix j = sys.jacobian(traj.final_w);
    s.t.push_back(last_t);
    s.delta.push_back((gram(j) - k0).norm() / k0_norm);
  }
  s.delta.front() = 0.0;  // exact at t = 0
  s.max_delta = *std::max_element(s.delta.begin(), s.delta.end());
  s.converged = traj.converged;
  s.iterations = traj.iterations;
  s.final_loss = traj.records.empty() ? std::nan("") : traj.records.back().loss;
  return s;
}

std::vector<SweepCell> sweep_cells(const std::vector<std::string>& families,
                                   const std::vector<Index>& widths,
                                   const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepCell> cells;
  for (const auto& f : families)
    for (Index w : widths)
      for (auto s : seeds) cells.push_back({f, w, s});
  return cells;
}

std::vector<KernelChangeSeries> run_sweep(
    const std::vector<SweepCell>& cells, const Dataset& data, const DriftRunOptions& options,
    Index threads, const std::function<void(const KernelChangeSeries&)>& on_done) {
  std::vector<KernelChangeSeries> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      try {
        results[k] = run_kernel_drift(cells[k].family, cells[k].width, cells[k].seed, data, options);
        if (on_done) {
          std::lock_guard<std::mutex> lock(mu);
          on_done(results[k]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = cells.size();
        return;
      }
    }
  };
  const Index count = std::max<Index>(1, std::min<Index>(threads, static_cast<Index>(cells.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index k = 0; k < count; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<WidthSummary> summarize_widths(const std::vector<RunSummary>& runs) {
  std::vector<WidthSummary> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : runs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const WidthSummary& w) {
      return w.family == r.family && w.width == r.width;
    });
    std::size_t k;
    if (it == out.end()) {
      out.push_back({r.family, r.width, 0.0, 0.0, 0, 0});
      values.emplace_back();
      k = out.size() - 1;
    } else {
      k = static_cast<std::size_t>(it - out.begin());
    }
    values[k].push_back(r.max_delta);
    out[k].runs += 1;
    if (!r.converged) out[k].non_converged += 1;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& v = values[k];
    out[k].mean_max_delta = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    out[k].median_max_delta = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need two or more points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    require(x[k] > 0.0 && y[k] > 0.0, "loglog_slope: values must be positive");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace ntkcond

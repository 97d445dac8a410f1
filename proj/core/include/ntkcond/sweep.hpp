#ifndef NTKCOND_SWEEP_HPP
#define NTKCOND_SWEEP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ntkcond/dataset.hpp"
#include "ntkcond/records.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

/// The shallow ReLU network with trainable w, v, b used by the drift sweep,
/// optionally composed with an output map:
/// linear-output (identity), tanh-output (3 tanh) or swish-output (swish).
struct DriftNetwork {
  SystemPtr base;
  SystemPtr system;
  OutputMap output_map;
  Vector w0;
};
DriftNetwork drift_network(const std::string& family, Index width, const std::vector<double>& inputs,
                           std::uint64_t seed);

struct DriftRunOptions {
  Index max_iters = 100000;
  double loss_tol = 1e-4;
  /// 0: every iteration for m <= 10^4, every 10 iterations above.
  Index kernel_stride = 0;
  /// Fixed step; otherwise the Cor 5.1 rule with mu = mu_fraction lambda_min(K0).
  std::optional<double> step;
  double mu_fraction = 0.5;
  double step_scale = 1.0;
};

Index default_kernel_stride(Index width);

/// One (family, width, seed) cell: GD until loss < loss_tol or max_iters,
/// recording Delta K_t at the kernel stride.
KernelChangeSeries run_kernel_drift(const std::string& family, Index width, std::uint64_t seed,
                                    const Dataset& data, const DriftRunOptions& options = {});

struct SweepCell {
  std::string family;
  Index width = 0;
  std::uint64_t seed = 0;
};

/// Cells ordered by (family order, width, seed order); results come back in
/// that order whatever the thread count.
std::vector<SweepCell> sweep_cells(const std::vector<std::string>& families,
                                   const std::vector<Index>& widths,
                                   const std::vector<std::uint64_t>& seeds);

std::vector<KernelChangeSeries> run_sweep(
    const std::vector<SweepCell>& cells, const Dataset& data, const DriftRunOptions& options,
    Index threads = 1,
    const std::function<void(const KernelChangeSeries&)>& on_done = nullptr);

/// Mean and median of max_delta per (family, width), in first-seen order.
std::vector<WidthSummary> summarize_widths(const std::vector<RunSummary>& runs);

/// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ntkcond

#endif  // NTKCOND_SWEEP_HPP

#ifndef NTKCOND_RECORDS_HPP
#define NTKCOND_RECORDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntkcond/bounds.hpp"
#include "ntkcond/conditioning.hpp"
#include "ntkcond/hessian.hpp"
#include "ntkcond/linearize.hpp"
#include "ntkcond/optimize.hpp"

namespace ntkcond {

std::string version();

/// Per-run kernel drift series Delta K_t = ||K_t - K_0||_F / ||K_0||_F.
struct KernelChangeSeries {
  std::string family;
  Index width = 0;
  std::uint64_t seed = 0;
  std::vector<Index> t;
  std::vector<double> delta;
  double max_delta = 0.0;
  bool converged = false;
  Index iterations = 0;
  double final_loss = 0.0;
  double step = 0.0;
  std::string step_rule;
  double lambda_min_k0 = 0.0;
};

/// A KernelChangeSeries without the series itself, as stored in summaries.
struct RunSummary {
  std::string family;
  Index width = 0;
  std::uint64_t seed = 0;
  double max_delta = 0.0;
  bool converged = false;
  Index iterations = 0;
  double final_loss = 0.0;
  double step = 0.0;
  std::string step_rule;
  double lambda_min_k0 = 0.0;
  bool operator==(const RunSummary&) const = default;
};
RunSummary summarize(const KernelChangeSeries& s);

struct WidthSummary {
  std::string family;
  Index width = 0;
  double mean_max_delta = 0.0;
  double median_max_delta = 0.0;
  Index runs = 0;
  Index non_converged = 0;
  bool operator==(const WidthSummary&) const = default;
};

struct SweepSummary {
  nlohmann::json config;
  std::string version;
  std::vector<RunSummary> runs;
  std::vector<WidthSummary> widths;
  bool operator==(const SweepSummary&) const = default;
};

namespace io {

/// Finite doubles as numbers, non-finite ones as "inf", "-inf", "nan".
nlohmann::json number(double v);
double to_double(const nlohmann::json& j);
/// %.17g, enough digits for an exact double round trip.
std::string format_double(double v);

nlohmann::json vector_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConditioningCertificate& c);
ConditioningCertificate certificate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConstantsEstimate& e);
ConstantsEstimate constants_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GdPrescription& p);
GdPrescription prescription_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RateReport& r);
RateReport rate_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CurvatureProbeResult& r);
CurvatureProbeResult probe_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KernelChangeReport& r);

nlohmann::json to_json(const DivergenceReport& r);
DivergenceReport divergence_from_json(const nlohmann::json& j);

nlohmann::json to_json(const bounds::DeepBounds& b);

nlohmann::json to_json(const RunSummary& r);
RunSummary run_summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepSummary& s);
SweepSummary sweep_summary_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// Columns t, loss, dist_from_init, grad_norm, lambda_min_K (blank when absent).
void write_trajectory_csv(const std::string& path, const Trajectory& t);
std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path);

/// Columns t, gap, loss_nonlinear, loss_linearized, step_gap.
void write_gap_csv(const std::string& path, const DivergenceReport& r);

/// Columns t, delta_k.
void write_series_csv(const std::string& path, const KernelChangeSeries& s);
KernelChangeSeries read_series_csv(const std::string& path);

/// Whitespace-separated columns with a '#' header line, for gnuplot.
void write_dat(const std::string& path, const std::string& title,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

}  // namespace io
}  // namespace ntkcond

#endif  // NTKCOND_RECORDS_HPP

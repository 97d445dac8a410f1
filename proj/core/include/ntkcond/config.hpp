#ifndef NTKCOND_CONFIG_HPP
#define NTKCOND_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntkcond/dataset.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

enum class ExperimentKind { kSweep, kCertify, kTrain, kProbe, kLinearize, kBounds };
std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& s);

/// Thrown for malformed or unknown configuration keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  /// linear | product | quadratic | shallow | deep | sparse
  std::string family = "shallow";
  Index width = 1000;
  std::vector<Index> widths;
  std::string activation = "tanh";
  std::string output_activation = "identity";
  /// shallow only: full | hidden-only
  std::string parameterization = "full";
  Index depth = 3;
  Index input_dim = 1;
  Index sparsity = 2;
  /// linear: explicit A (rows), or diagonal entries.
  std::vector<std::vector<double>> matrix;
  std::vector<double> diagonal;
  /// quadratic: number of parameters and entry scale of B_i.
  Index params = 20;
  double scale = 1.0;
  std::uint64_t seed = 0;
  /// Explicit starting point; empty means seeded Gaussian initialisation.
  std::vector<double> initial;
};

struct DatasetConfig {
  Index n = 20;
  std::uint64_t seed = 0;
  /// Repeat the first input so the kernel is singular.
  bool duplicate_inputs = false;
  /// Explicit targets (linear/product families); overrides the generator.
  std::vector<double> targets;
};

struct OptimizerConfig {
  /// "thm4.2c" | "cor5.1" | a positive number given as text.
  std::string step = "thm4.2c";
  std::optional<double> step_value;
  std::optional<double> mu;
  double mu_fraction = 0.5;
  double step_scale = 1.0;
  Index max_iters = 100000;
  double loss_tol = 1e-4;
  /// gd | sgd
  std::string method = "gd";
  Index batch_size = 1;
  Index kernel_stride = 0;
  Index log_every = 10;
  double gamma_safety = 1.1;
  double delta = 0.1;
};

struct SweepConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::string> families{"linear-output", "tanh-output", "swish-output"};
  /// 0 means: every iteration for m <= 10^4, every 10 above.
  Index kernel_stride = 0;
  bool allow_large = false;
};

struct BallConfig {
  double radius = 1.0;
  Index samples = 64;
  std::uint64_t seed = 0;
};

struct ProbeConfig {
  std::vector<double> radii{1e-1, 1e-2, 1e-3};
  Index directions = 32;
  std::uint64_t seed = 0;
  Index train_iters = 200;
};

struct LinearizeConfig {
  double epsilon = 0.1;
  Index iters = 1000;
};

struct BoundsConfig {
  Index depth = 2;
  double width = 1024;
  double radius = 1.0;
  double l_sigma = 1.0;
  double beta_sigma = 0.0;
  double c0 = 3.0;
  double c_x = 1.0;
  double s0 = 1.0;
  double delta = 0.1;
  std::optional<double> n;
  std::optional<double> mu;
  std::optional<double> lambda_min;
  std::optional<double> sparsity;
  std::optional<double> beta_alpha;
  std::optional<double> s_p;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kCertify;
  ModelConfig model;
  DatasetConfig dataset;
  OptimizerConfig optimizer;
  SweepConfig sweep;
  BallConfig ball;
  ProbeConfig probe;
  LinearizeConfig linearize;
  BoundsConfig bounds;
  std::string output_dir = "ntkcond-out";
  Index threads = 1;
};

/// Strict: unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
/// Fully resolved configuration, defaults included.
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Throws ConfigError when invariants fail (widths increasing, seeds present...).
void validate_config(const ExperimentConfig& config);

/// A system built from configuration plus the data it is fitted to.
struct Problem {
  SystemPtr system;
  Vector w0;
  Vector targets;
  Dataset dataset;
};

Problem build_problem(const ExperimentConfig& config, std::optional<Index> width = std::nullopt);

}  // namespace ntkcond

#endif  // NTKCOND_CONFIG_HPP

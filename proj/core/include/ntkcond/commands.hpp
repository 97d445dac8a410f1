#ifndef NTKCOND_COMMANDS_HPP
#define NTKCOND_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "ntkcond/config.hpp"

namespace ntkcond {

/// Process exit codes of the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitNotConditioned = 2,
  kExitCapacity = 3,
  kExitDiverged = 4,
  kExitPrecondition = 5,
};

struct CommandOverrides {
  std::optional<std::string> out_dir;
  std::optional<Index> threads;
  std::optional<std::uint64_t> seed;
};

/// Applies --out, --threads and --seed-override. A seed override replaces
/// the model seed, the sweep seed list and the sampling seeds.
void apply_overrides(ExperimentConfig& config, const CommandOverrides& overrides);

int cmd_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_certify(const ExperimentConfig& config, std::ostream& log);
int cmd_train(const ExperimentConfig& config, std::ostream& log);
int cmd_probe(const ExperimentConfig& config, std::ostream& log);
int cmd_linearize(const ExperimentConfig& config, std::ostream& log);
int cmd_bounds(const ExperimentConfig& config, std::ostream& log);

/// Dispatches by subcommand name (sweep, certify, train, probe, linearize,
/// bounds) and maps exceptions to exit codes, writing the reason to err.
int run_command(const std::string& name, const ExperimentConfig& config, std::ostream& log,
                std::ostream& err);

}  // namespace ntkcond

#endif  // NTKCOND_COMMANDS_HPP

// ntkcond command-line front end.
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "ntkcond/commands.hpp"
#include "ntkcond/config.hpp"
#include "ntkcond/records.hpp"

namespace {

const std::map<std::string, ntkcond::ExperimentKind> kSubcommands{
    {"sweep", ntkcond::ExperimentKind::kSweep},
    {"certify", ntkcond::ExperimentKind::kCertify},
    {"train", ntkcond::ExperimentKind::kTrain},
    {"probe", ntkcond::ExperimentKind::kProbe},
    {"linearize", ntkcond::ExperimentKind::kLinearize},
    {"bounds", ntkcond::ExperimentKind::kBounds},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tangent-kernel conditioning experiments for over-parameterized systems"};
  app.set_version_flag("--version", ntkcond::version());
  app.require_subcommand(1);

  std::string config_path;
  ntkcond::CommandOverrides overrides;
  std::string out_dir;
  ntkcond::Index threads = 0;
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed-override", seed, "replace every seed in the configuration");

  // Subcommands inherit this, so global flags may follow the subcommand name.
  app.fallthrough();
  for (const auto& [name, kind] : kSubcommands) {
    app.add_subcommand(name, "run the " + ntkcond::to_string(kind) + " experiment");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  ntkcond::ExperimentConfig config;
  try {
    config = ntkcond::load_config(config_path);
    if (config.kind != kSubcommands.at(name)) {
      std::cerr << "error: configuration kind '" << ntkcond::to_string(config.kind)
                << "' does not match subcommand '" << name << "'\n";
      return ntkcond::kExitError;
    }
    if (*out_opt) overrides.out_dir = out_dir;
    if (*threads_opt) overrides.threads = threads;
    if (*seed_opt) overrides.seed = seed;
    ntkcond::apply_overrides(config, overrides);
    ntkcond::validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ntkcond::kExitError;
  }
  return ntkcond::run_command(name, config, std::cout, std::cerr);
}

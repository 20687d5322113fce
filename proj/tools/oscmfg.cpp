#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "oscmfg/error.hpp"
#include "oscmfg/runner.hpp"

namespace {

int config_failure(const std::string& message, int line = 0) {
  std::cerr << oscmfg::error_record("config", message, oscmfg::kExitConfigError, line) << '\n';
  return oscmfg::kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oscillator mean-field game experiments"};
  app.set_version_flag("--version", oscmfg::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  const char* names[] = {"simulate", "spectrum", "bifurcation", "learn", "fpf", "oracle-compare"};
  for (const char* name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Experiment config file")->required();
    sub->add_option("--seed", seed, "Override the seed");
    sub->add_option("--out", out, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return config_failure(e.what());
  }

  const std::string chosen = app.get_subcommands().front()->get_name();
  oscmfg::ExperimentConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) return config_failure("cannot read " + config_path);
    std::ostringstream text;
    text << in.rdbuf();
    config = oscmfg::parse_config(text.str());
    const oscmfg::Subcommand sc = oscmfg::parse_subcommand(chosen);
    if (config.subcommand && *config.subcommand != sc)
      return config_failure("config names subcommand " + std::string(oscmfg::to_string(*config.subcommand)) +
                            " but " + chosen + " was requested");
    config.subcommand = sc;
  } catch (const oscmfg::ConfigError& e) {
    return config_failure(e.what(), e.line());
  }
  if (seed) config.seed = *seed;
  if (!out.empty()) config.out = out;

  return oscmfg::run_with_status(config, std::cerr);
}

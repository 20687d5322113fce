#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oscmfg/config.hpp"

namespace oscmfg {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputRootEnv = "OSCMFG_OUTPUT_ROOT";

enum ExitCode : int { kExitOk = 0, kExitDomainError = 1, kExitConfigError = 2 };

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::string> artifacts;  // file names inside out_dir
  std::vector<std::pair<std::string, std::string>> summary;  // key, value
};

// Output directory: config.out if set, else $OSCMFG_OUTPUT_ROOT/<subcommand>,
// else ./out/<subcommand>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

// Dispatches to the owning module and writes the CSV artifacts, results.txt and
// manifest.txt. Throws DomainError or ConfigError.
RunResult run(const ExperimentConfig& config);

// Runs and maps failures to exit codes. On failure a one-line JSON error record
// goes to `err` (and to error.json in the output directory when possible).
int run_with_status(const ExperimentConfig& config, std::ostream& err);

// JSON error record used by the CLI.
std::string error_record(const std::string& kind, const std::string& message, int exit_code, int line = 0);

}  // namespace oscmfg

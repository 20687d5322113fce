#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oscmfg/fpf.hpp"
#include "oscmfg/learning.hpp"
#include "oscmfg/model.hpp"

namespace oscmfg {

enum class Subcommand { Simulate, Spectrum, Bifurcation, Learn, Fpf, OracleCompare };

const char* to_string(Subcommand s);
// Throws ConfigError for an unknown name.
Subcommand parse_subcommand(std::string_view name);

struct SimulateSection {
  ModelParams params;
  double T = 100.0;
  bool record_phases = true;

  bool operator==(const SimulateSection&) const = default;
};

struct SpectrumSection {
  double sigma = 0.31622776601683794;  // sigma^2 = 0.1
  double gamma = 0.05;
  int k = 1;
  double floor_fraction = 0.05;  // lowest R of the sweep relative to the first
  double ivp_R = 0.0;            // linearized evolution at this R when > 0
  double ivp_T = 200.0;
  std::size_t K_max = 8;
  std::size_t n_omega = 101;

  bool operator==(const SpectrumSection&) const = default;
};

struct BifurcationSection {
  double sigma = 0.31622776601683794;
  double gamma_min = 0.0;
  double gamma_max = 0.1;
  std::size_t gamma_count = 11;

  bool operator==(const BifurcationSection&) const = default;
};

struct LearnSection {
  LearningExperimentConfig experiment;
  bool portrait = true;

  bool operator==(const LearnSection&) const = default;
};

struct FpfSection {
  FilterConfig filter;
  std::vector<double> snapshots;
  std::size_t bins = 64;

  bool operator==(const FpfSection&) const = default;
};

struct OracleSection {
  FilterConfig filter = matched_filter();
  std::size_t M = 512;
  std::size_t bins = 32;
  bool exact_gain = true;

  static FilterConfig matched_filter();
  bool operator==(const OracleSection&) const = default;
};

struct ExperimentConfig {
  std::optional<Subcommand> subcommand;
  std::uint64_t seed = 1;
  std::string out;  // empty: derived from the environment at run time
  std::size_t record_stride = 1;

  SimulateSection simulate;
  SpectrumSection spectrum;
  BifurcationSection bifurcation;
  LearnSection learn;
  FpfSection fpf;
  OracleSection oracle;

  bool operator==(const ExperimentConfig&) const = default;
};

// INI-style document: `key = value` lines under [run], [output], [simulate],
// [spectrum], [bifurcation], [learn], [fpf] or [oracle-compare]. Lines starting
// with '#' or ';' are comments. [run] holds the subcommand and, when present,
// must name it. Throws ConfigError (with line number) on syntax errors, unknown
// sections or keys, duplicates, type mismatches, missing required keys and
// invalid values.
ExperimentConfig parse_config(std::string_view text);

// Every key of every section; parse_config(print_config(c)) == c.
std::string print_config(const ExperimentConfig& config);

}  // namespace oscmfg

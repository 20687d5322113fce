#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oscmfg/model.hpp"
#include "oscmfg/population.hpp"

namespace oscmfg {

struct SimulationOptions {
  double T = 100.0;
  std::uint64_t seed = 1;
  std::size_t record_stride = 1;
  bool record_phases = true;
};

struct SimulationRecord {
  double t = 0.0;
  std::vector<double> phases;    // empty unless record_phases
  std::vector<double> controls;  // controls applied from t on; empty unless record_phases
  double gamma_sq = 0.0;
  double mean_phase = 0.0;  // NaN when the resultant vanishes
};

struct SimulationResult {
  std::vector<SimulationRecord> records;
  double mean_gamma_sq = 0.0;  // time average over every step
  PhaseEnsemble final_state;
};

// Uniform initial phases and sampled frequencies, both derived from seed.
PhaseEnsemble initial_ensemble(const ModelParams& params, std::uint64_t seed);

// Kuramoto-controlled population over [0, T]. Records at every
// record_stride-th step and at the last step.
SimulationResult simulate_kuramoto(const ModelParams& params, const SimulationOptions& options);

std::size_t step_count(double T, double dt);

}  // namespace oscmfg

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "oscmfg/model.hpp"
#include "oscmfg/random.hpp"

namespace oscmfg {

enum class ObservationKind { Cos, Sin, Zero, Constant };

// h(theta) = cos(theta - shift), sin(theta - shift), 0, or level.
struct ObservationFunction {
  ObservationKind kind = ObservationKind::Cos;
  double shift = 0.0;
  double level = 1.0;

  double operator()(double theta) const;
  bool operator==(const ObservationFunction&) const = default;
  std::string tag() const;
  // "cos", "sin", "zero" or "constant"; throws DomainError otherwise.
  static ObservationKind parse_kind(const std::string& tag);
};

struct FilterConfig {
  double omega0 = 1.0;   // true frequency
  double sigma = 0.0;    // signal noise
  double sigma_B = 0.1;  // filter process noise
  double gamma_f = 0.5;  // filter frequencies uniform on [omega0 - gamma_f, omega0 + gamma_f]
  std::size_t N = 1000;
  double dt = 0.01;
  double T = 50.0;
  double theta0 = 0.0;  // true initial phase
  ObservationFunction h;

  void validate() const;
  bool operator==(const FilterConfig&) const = default;
  // Matched noise and frequencies: the filter is exact with the exact gain.
  bool is_exact_configuration() const { return sigma_B == sigma && gamma_f == 0.0; }
};

struct ParticleCloud {
  std::vector<double> phases;
  std::vector<double> frequencies;
  double time = 0.0;
  std::uint64_t step = 0;
};

struct GainCoeffs {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double condition = 1.0;
  bool degenerate = false;  // system was regularized
  double h_hat = 0.0;       // particle mean of h

  double gain(double theta) const { return -kappa1 * std::sin(theta) + kappa2 * std::cos(theta); }
};

struct ObservationPath {
  double dt = 0.01;
  std::vector<double> t;      // t_k, k = 0..K
  std::vector<double> theta;  // true phase at t_k
  std::vector<double> dz;     // increment over [t_k, t_{k+1}), k = 0..K-1
  std::uint64_t seed = 0;
};

ObservationPath synthesize_observations(const FilterConfig& config, double T, std::uint64_t seed);

// Galerkin gain on the basis {cos, sin}.
GainCoeffs galerkin_gain(const ParticleCloud& cloud, const ObservationFunction& h);

// Particle update with a supplied gain function and h estimate.
ParticleCloud fpf_step_with_gain(const ParticleCloud& cloud, double dz, const FilterConfig& config,
                                 const NoiseSource& noise, const std::function<double(double)>& K, double h_hat);

// Particle update with the Galerkin gain of the current cloud.
ParticleCloud fpf_step(const ParticleCloud& cloud, double dz, const FilterConfig& config, const NoiseSource& noise);

struct Estimate {
  double theta_hat = 0.0;
  double spread = 0.0;
  double resultant = 0.0;
};

// Throws DomainError("undefined_estimate") on a zero resultant.
Estimate estimate(const ParticleCloud& cloud);

// Phases i.i.d. uniform on the circle, frequencies i.i.d. uniform on the filter band.
ParticleCloud initial_cloud(const FilterConfig& config, std::uint64_t seed);

// Normalized histogram on n_bins equal bins of [0, 2pi).
std::vector<double> phase_histogram(std::span<const double> phases, std::size_t n_bins);

struct FpfRow {
  double t = 0.0;
  double theta_true = 0.0;
  double theta_hat = 0.0;
  double spread = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double dz = 0.0;
};

struct DensitySnapshot {
  double t = 0.0;
  std::vector<double> density;  // per bin, integrates to 1
};

struct FpfRun {
  std::vector<FpfRow> rows;
  std::vector<DensitySnapshot> snapshots;
  double rmse = 0.0;  // circular RMSE over t >= T / 4
};

FpfRun run_fpf_experiment(const FilterConfig& config, std::uint64_t seed, std::size_t record_stride = 1,
                          std::span<const double> snapshot_times = {}, std::size_t n_bins = 64);

}  // namespace oscmfg

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oscmfg/model.hpp"
#include "oscmfg/random.hpp"

namespace oscmfg {

// Maps any finite angle to [0, 2pi). Throws on NaN or infinity.
double wrap_phase(double x);

// Signed difference a - b mapped to [-pi, pi).
double angle_difference(double a, double b);

// i.i.d. uniform on [1 - gamma, 1 + gamma], draw i taken from counter i of rng.
std::vector<double> sample_frequencies(double gamma, std::size_t N, const RandomStream& rng);

// Mean phasor of a set of phases.
struct MeanField {
  double mean_sin = 0.0;
  double mean_cos = 0.0;

  static MeanField of(std::span<const double> phases);
  double gamma_sq() const { return mean_sin * mean_sin + mean_cos * mean_cos; }
};

// Controls take 0-based oscillator indices.
double kuramoto_control(std::size_t i, const PhaseEnsemble& ensemble, double kappa);
double parameterized_control(std::size_t i, const PhaseEnsemble& ensemble, const PolicyEntry& policy, double R);

// Same laws evaluated from a precomputed mean field (O(1) per oscillator).
double kuramoto_control(double theta, const MeanField& mf, double kappa);
double parameterized_control(double theta, const MeanField& mf, const PolicyEntry& policy, double R);

// Kuramoto control for every oscillator.
std::vector<double> kuramoto_controls(const PhaseEnsemble& ensemble, double kappa);

// One Euler-Maruyama step. Oscillator i draws its increment from stream i of
// `noise` at counter ensemble.step().
PhaseEnsemble em_step(const PhaseEnsemble& ensemble, std::span<const double> controls, const ModelParams& params,
                      const NoiseSource& noise);

double order_parameter_sq(std::span<const double> phases);
double order_parameter_sq(const PhaseEnsemble& ensemble);

// Resultant length of the mean phasor.
double resultant_length(std::span<const double> phases);

// Throws DomainError("undefined_mean") when the resultant length is below 1e-12.
double circular_mean(std::span<const double> phases);

struct PhaseSnapshot {
  double t = 0.0;
  std::vector<double> phases;
};

struct CostBreakdown {
  std::vector<double> state;    // per-oscillator time average of mean_j c(theta_i - theta_j)
  std::vector<double> control;  // per-oscillator time average of (R/2) u_i^2
  std::vector<double> total;
};

// Left-endpoint Riemann time averages over the recorded grid. controls[n] are
// the controls applied on [t_n, t_{n+1}).
CostBreakdown empirical_cost(const std::vector<PhaseSnapshot>& trajectory,
                             const std::vector<std::vector<double>>& controls, double R, const CostSpec& cost);

}  // namespace oscmfg

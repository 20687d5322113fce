#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "oscmfg/model.hpp"

namespace oscmfg {

struct LinearizedOptions {
  std::size_t K_max = 8;     // theta modes 1..K_max (negative modes by conjugation)
  std::size_t n_omega = 101;  // Gauss-Legendre nodes on the frequency support
};

struct NormHistory {
  std::vector<double> t;
  std::vector<double> norm;
};

// Linearization of the coupled (h, p) system about the incoherent state,
// expanded in theta-Fourier modes and collocated in omega. Each mode is a
// constant-coefficient linear system solved through its eigendecomposition;
// the backward equation for h is closed by keeping only non-growing modes.
class LinearizedEvolver {
 public:
  LinearizedEvolver(double R, const ModelParams& params, const CostSpec& cost = CostSpec::kuramoto(),
                    LinearizedOptions options = {});
  ~LinearizedEvolver();
  LinearizedEvolver(LinearizedEvolver&&) noexcept;
  LinearizedEvolver& operator=(LinearizedEvolver&&) noexcept;

  const std::vector<double>& omega_nodes() const { return omega_; }
  // Frequency-law weights; they sum to 1.
  const std::vector<double>& omega_weights() const { return weight_; }
  std::size_t K_max() const { return options_.K_max; }

  // q[j][m] is the perturbation at omega_nodes()[j] and theta_m = 2 pi m / n_theta.
  // Rows must have zero theta-mean. Returns the g-weighted L2 norm of p at
  // n_samples + 1 equally spaced times in [0, T].
  NormHistory evolve(const std::vector<std::vector<double>>& q, double T, std::size_t n_samples) const;

  // Largest real part among eigenvalues kept by the selection rule.
  double max_kept_real_part() const;

 private:
  struct Mode;
  LinearizedOptions options_;
  std::vector<double> omega_;
  std::vector<double> weight_;
  std::vector<Mode> modes_;
};

// q(theta, omega) = amplitude * cos(theta) on the evolver's omega nodes.
std::vector<std::vector<double>> first_harmonic_perturbation(const LinearizedEvolver& evolver,
                                                             std::size_t n_theta = 64, double amplitude = 1.0);

NormHistory linearized_ivp_evolve(const std::vector<std::vector<double>>& q, double R, const ModelParams& params,
                                  double T, std::size_t n_samples = 400,
                                  const CostSpec& cost = CostSpec::kuramoto(), LinearizedOptions options = {});

enum class Verdict { IncoherenceStable, Marginal, Synchrony };
const char* to_string(Verdict v);

struct StabilityReport {
  double R = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;
  double R_c = 0.0;
  Verdict verdict = Verdict::IncoherenceStable;
  std::optional<double> max_real_part;  // of the located first-harmonic discrete eigenvalue
  NormHistory history;                  // first-harmonic perturbation
};

StabilityReport assess_stability(double R, const ModelParams& params, double T,
                                 const CostSpec& cost = CostSpec::kuramoto());

}  // namespace oscmfg

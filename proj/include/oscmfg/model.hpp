#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

namespace oscmfg {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ModelParams {
  double sigma = std::sqrt(0.1);  // noise amplitude
  double gamma = 0.05;            // frequency half-width
  double R = 1.0;                 // control penalty
  double kappa = 1.0;             // Kuramoto coupling
  double epsilon = 1.0;           // learning rate
  double wave_speed = 1.0;
  std::size_t N = 200;
  double dt = 0.01;

  double sigma_sq() const { return sigma * sigma; }
  bool operator==(const ModelParams&) const = default;
  // Throws DomainError on a violated invariant.
  void validate() const;
};

// Uniform law on [1 - gamma, 1 + gamma]; a point mass at 1 when gamma = 0.
class FrequencyDistribution {
 public:
  explicit FrequencyDistribution(double gamma);

  double gamma() const { return gamma_; }
  double lower() const { return 1.0 - gamma_; }
  double upper() const { return 1.0 + gamma_; }
  bool is_point_mass() const { return gamma_ == 0.0; }
  // Density on the support; zero outside. Undefined (throws) for the point mass.
  double density(double omega) const;

 private:
  double gamma_;
};

// Cosine coefficients of an even cost: c(x) = sum_{k>=0} C_k cos(k x).
class CostSpec {
 public:
  explicit CostSpec(std::vector<double> fourier);
  // c(x) = sin^2(x/2) / 2 = (1 - cos x) / 4
  static CostSpec kuramoto();

  double coefficient(std::size_t k) const { return k < fourier_.size() ? fourier_[k] : 0.0; }
  const std::vector<double>& fourier() const { return fourier_; }
  std::size_t max_harmonic() const { return fourier_.empty() ? 0 : fourier_.size() - 1; }
  bool first_harmonic_only() const;
  double operator()(double x) const;

 private:
  std::vector<double> fourier_;
};

// One oscillator's control law parameters: u = -(A/R) * mean_j sin(theta - theta_j - zeta).
struct PolicyEntry {
  double A = 0.0;
  double zeta = 0.0;
};

using PolicyParams = std::vector<PolicyEntry>;

// Finite population state. Frequencies are shared and immutable across steps.
class PhaseEnsemble {
 public:
  PhaseEnsemble(std::vector<double> phases, std::vector<double> frequencies, double time = 0.0,
                std::uint64_t step = 0);

  const std::vector<double>& phases() const { return phases_; }
  const std::vector<double>& frequencies() const { return *frequencies_; }
  double time() const { return time_; }
  std::uint64_t step() const { return step_; }
  std::size_t size() const { return phases_.size(); }

  // Same frequencies, new phases, time advanced by dt.
  PhaseEnsemble advanced(std::vector<double> phases, double dt) const;

 private:
  PhaseEnsemble(std::vector<double> phases, std::shared_ptr<const std::vector<double>> frequencies,
                double time, std::uint64_t step);

  std::vector<double> phases_;
  std::shared_ptr<const std::vector<double>> frequencies_;
  double time_;
  std::uint64_t step_;
};

}  // namespace oscmfg

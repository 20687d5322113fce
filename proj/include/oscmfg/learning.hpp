#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oscmfg/model.hpp"

namespace oscmfg {

// First-harmonic moments of the population density.
struct FirstHarmonic {
  double Pc = 0.0;
  double Ps = 0.0;

  static FirstHarmonic of(std::span<const double> phases);
  double magnitude_sq() const { return Pc * Pc + Ps * Ps; }
};

// c_bar(theta) = C0 + C1 (Pc cos theta + Ps sin theta); first-harmonic costs only.
double mean_field_cost_bar(double theta, const FirstHarmonic& harmonic, const CostSpec& cost = CostSpec::kuramoto());

// Stationary point of the Galerkin loss, branch with A* > 0.
PolicyEntry galerkin_params_closed(double omega, double sigma, double wave_speed = 1.0);

struct BellmanError {
  std::vector<double> values;  // L(theta) on the grid
  double eta = 0.0;            // grid average of the minimized Hamiltonian
};

// Point-wise Bellman error of the policy alpha. The relative value function is
// h0 = -A (Pc cos(theta - zeta) + Ps sin(theta - zeta)), which makes
// -dh0/dtheta / R the parameterized control law.
BellmanError bellman_error(std::span<const double> theta_grid, const PolicyEntry& alpha, double omega,
                           const FirstHarmonic& harmonic, const ModelParams& params,
                           const CostSpec& cost = CostSpec::kuramoto());

// Trapezoid approximations of (int L cos, int L sin) over a uniform periodic grid
// theta_m = 2 pi m / n. Requires n >= 16.
std::pair<double, double> galerkin_projections(std::span<const double> L);

// Uniform periodic grid with n points.
std::vector<double> uniform_theta_grid(std::size_t n);

// <L, cos>^2 + <L, sin>^2 with L from bellman_error on an n-point grid.
double galerkin_loss(const PolicyEntry& alpha, double omega, const FirstHarmonic& harmonic, const ModelParams& params,
                     std::size_t n_grid = 256);

struct LossGradient {
  double dA = 0.0;
  double dzeta = 0.0;
};

// Closed-form partial derivatives of galerkin_loss.
LossGradient loss_gradient(double A, double zeta, double omega, const ModelParams& params,
                           const FirstHarmonic& harmonic);

struct GalerkinSolution {
  double A_star = 0.0;
  double zeta_star = 0.0;
  double eta = 0.0;
};

GalerkinSolution galerkin_solution(double omega, const ModelParams& params, const FirstHarmonic& harmonic);

struct LearningState {
  PolicyParams policy;
  double time = 0.0;
};

// (dA/dt, dzeta/dt) of the learning rule.
LossGradient learning_rhs(const PolicyEntry& alpha, double omega, const ModelParams& params, double gamma_sq);

// Explicit Euler step for every oscillator; omegas[i] belongs to policy[i].
LearningState learning_ode_step(const LearningState& state, double gamma_sq, std::span<const double> omegas,
                                const ModelParams& params, double dt);

enum class Stability { Attracting, Unstable, Neutral };
const char* to_string(Stability s);

struct Equilibrium {
  int label = 1;
  PolicyEntry point;
  std::array<double, 2> eigenvalues{};  // of the symmetric Jacobian at eps * Gamma^2 = 1
  Stability stability = Stability::Neutral;
};

std::array<Equilibrium, 4> equilibria(double omega, double sigma, double wave_speed = 1.0);

// Euler integration of the learning ODE at fixed gamma_sq.
PolicyEntry integrate_learning_ode(PolicyEntry start, double omega, const ModelParams& params, double gamma_sq,
                                   double T, double dt = 1e-2);

// Distance in (A, zeta) with zeta measured along the circle.
double policy_distance(const PolicyEntry& a, const PolicyEntry& b);

// Within `fraction` of (A*, zeta*) or of (-A*, zeta* - pi): amplitude error at
// most fraction * |A*| and circular phase error at most fraction * pi.
bool in_neighborhood(const PolicyEntry& alpha, const PolicyEntry& target, double fraction = 0.05);

struct PortraitRow {
  double A = 0.0;
  double zeta = 0.0;
  double dA_dt = 0.0;
  double dzeta_dt = 0.0;
};

std::vector<PortraitRow> phase_portrait(double omega, const ModelParams& params, double A_min, double A_max,
                                        std::size_t n_A, std::size_t n_zeta);

struct LearningExperimentConfig {
  std::size_t N = 200;
  double omega1 = 1.1;
  double gamma = 0.1;
  double sigma = 0.1;
  double kappa = 1.0;
  double epsilon = 10.0;
  double R = 1.0;
  double wave_speed = 1.0;
  double T = 4000.0;
  double dt = 0.01;
  double A0 = 0.0;
  double zeta0 = 0.0;

  void validate() const;
  bool operator==(const LearningExperimentConfig&) const = default;
};

struct LearningSample {
  double t = 0.0;
  double A = 0.0;
  double zeta = 0.0;
  double gamma_sq = 0.0;
};

struct LearningRun {
  std::vector<LearningSample> samples;
  PolicyEntry target;                    // (A*, zeta*) at omega1
  std::optional<double> first_entry;     // first time inside the 5% neighborhood
  std::optional<double> settle_time;     // inside from this time through T
  double mean_gamma_sq = 0.0;
  PolicyEntry final_policy;
};

// Oscillator 1 learns its control law while oscillators 2..N use Kuramoto control.
LearningRun run_learning_experiment(const LearningExperimentConfig& config, std::uint64_t seed,
                                    std::size_t record_stride = 100);

}  // namespace oscmfg

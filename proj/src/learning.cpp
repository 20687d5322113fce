#include "oscmfg/learning.hpp"

#include <algorithm>
#include <cmath>

#include "oscmfg/error.hpp"
#include "oscmfg/population.hpp"
#include "oscmfg/simulate.hpp"

namespace oscmfg {

FirstHarmonic FirstHarmonic::of(std::span<const double> phases) {
  MeanField mf = MeanField::of(phases);
  return {mf.mean_cos, mf.mean_sin};
}

namespace {

void require_first_harmonic(const CostSpec& cost) {
  if (!cost.first_harmonic_only())
    throw DomainError("unsupported_cost", "only costs with a single cosine harmonic are supported");
}

}  // namespace

double mean_field_cost_bar(double theta, const FirstHarmonic& harmonic, const CostSpec& cost) {
  require_first_harmonic(cost);
  return cost.coefficient(0) + cost.coefficient(1) * (harmonic.Pc * std::cos(theta) + harmonic.Ps * std::sin(theta));
}

PolicyEntry galerkin_params_closed(double omega, double sigma, double wave_speed) {
  if (!(sigma > 0.0)) throw DomainError("invalid_params", "sigma must be positive");
  const double d = omega - wave_speed;
  const double s = 0.5 * sigma * sigma;
  const double rho = std::hypot(d, s);
  return {1.0 / (4.0 * rho), wrap_phase(std::atan2(-d, s))};
}

BellmanError bellman_error(std::span<const double> theta_grid, const PolicyEntry& alpha, double omega,
                           const FirstHarmonic& harmonic, const ModelParams& params, const CostSpec& cost) {
  if (theta_grid.empty()) throw DomainError("empty_grid", "theta grid is empty");
  require_first_harmonic(cost);
  const double d = omega - params.wave_speed;
  const double s = 0.5 * params.sigma_sq();
  const double A = alpha.A;
  BellmanError out;
  out.values.resize(theta_grid.size());
  for (std::size_t m = 0; m < theta_grid.size(); ++m) {
    const double x = theta_grid[m] - alpha.zeta;
    const double dh = A * (harmonic.Pc * std::sin(x) - harmonic.Ps * std::cos(x));
    const double d2h = A * (harmonic.Pc * std::cos(x) + harmonic.Ps * std::sin(x));
    out.values[m] = mean_field_cost_bar(theta_grid[m], harmonic, cost) + d * dh - dh * dh / (2.0 * params.R) + s * d2h;
  }
  // trapezoid average over the periodic grid
  std::vector<std::size_t> order(theta_grid.size());
  for (std::size_t m = 0; m < order.size(); ++m) order[m] = m;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return theta_grid[a] < theta_grid[b]; });
  double integral = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    std::size_t a = order[j], b = order[(j + 1) % order.size()];
    double width = theta_grid[b] - theta_grid[a];
    if (j + 1 == order.size()) width += kTwoPi;
    integral += 0.5 * width * (out.values[a] + out.values[b]);
  }
  out.eta = integral / kTwoPi;
  for (double& v : out.values) v -= out.eta;
  return out;
}

std::vector<double> uniform_theta_grid(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t m = 0; m < n; ++m) g[m] = kTwoPi * static_cast<double>(m) / static_cast<double>(n);
  return g;
}

std::pair<double, double> galerkin_projections(std::span<const double> L) {
  if (L.size() < 16) throw DomainError("invalid_params", "need at least 16 grid points");
  const double h = kTwoPi / static_cast<double>(L.size());
  double c = 0.0, s = 0.0;
  for (std::size_t m = 0; m < L.size(); ++m) {
    double th = h * static_cast<double>(m);
    c += L[m] * std::cos(th);
    s += L[m] * std::sin(th);
  }
  return {h * c, h * s};
}

double galerkin_loss(const PolicyEntry& alpha, double omega, const FirstHarmonic& harmonic, const ModelParams& params,
                     std::size_t n_grid) {
  auto grid = uniform_theta_grid(n_grid);
  auto [c, s] = galerkin_projections(bellman_error(grid, alpha, omega, harmonic, params).values);
  return c * c + s * s;
}

LossGradient loss_gradient(double A, double zeta, double omega, const ModelParams& params,
                           const FirstHarmonic& harmonic) {
  const double d = omega - params.wave_speed;
  const double s = 0.5 * params.sigma_sq();
  const double pre = 0.5 * kPi * kPi * harmonic.magnitude_sq();
  return {pre * (4.0 * A * (d * d + s * s) + (d * std::sin(zeta) - s * std::cos(zeta))),
          pre * A * (d * std::cos(zeta) + s * std::sin(zeta))};
}

GalerkinSolution galerkin_solution(double omega, const ModelParams& params, const FirstHarmonic& harmonic) {
  PolicyEntry a = galerkin_params_closed(omega, params.sigma, params.wave_speed);
  auto grid = uniform_theta_grid(256);
  return {a.A, a.zeta, bellman_error(grid, a, omega, harmonic, params).eta};
}

LossGradient learning_rhs(const PolicyEntry& alpha, double omega, const ModelParams& params, double gamma_sq) {
  const double d = omega - params.wave_speed;
  const double s = 0.5 * params.sigma_sq();
  const double rate = params.epsilon * gamma_sq;
  return {-rate * (4.0 * alpha.A * (d * d + s * s) + (d * std::sin(alpha.zeta) - s * std::cos(alpha.zeta))),
          -rate * alpha.A * (d * std::cos(alpha.zeta) + s * std::sin(alpha.zeta))};
}

LearningState learning_ode_step(const LearningState& state, double gamma_sq, std::span<const double> omegas,
                                const ModelParams& params, double dt) {
  if (omegas.size() != state.policy.size())
    throw DomainError("invalid_params", "one frequency per learning oscillator required");
  if (!(gamma_sq >= 0.0 && gamma_sq <= 1.0 + 1e-12)) throw DomainError("invalid_params", "gamma_sq must lie in [0, 1]");
  LearningState next{state.policy, state.time + dt};
  for (std::size_t i = 0; i < next.policy.size(); ++i) {
    LossGradient f = learning_rhs(state.policy[i], omegas[i], params, gamma_sq);
    next.policy[i].A += dt * f.dA;
    next.policy[i].zeta = wrap_phase(next.policy[i].zeta + dt * f.dzeta);
  }
  return next;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Attracting: return "attracting";
    case Stability::Unstable: return "unstable";
    case Stability::Neutral: return "neutral";
  }
  return "unknown";
}

std::array<Equilibrium, 4> equilibria(double omega, double sigma, double wave_speed) {
  const PolicyEntry star = galerkin_params_closed(omega, sigma, wave_speed);
  const double d = omega - wave_speed;
  const double s = 0.5 * sigma * sigma;
  const std::array<PolicyEntry, 4> pts{PolicyEntry{star.A, star.zeta}, PolicyEntry{-star.A, wrap_phase(star.zeta - kPi)},
                                       PolicyEntry{0.0, wrap_phase(star.zeta - 0.5 * kPi)},
                                       PolicyEntry{0.0, wrap_phase(star.zeta + 0.5 * kPi)}};
  std::array<Equilibrium, 4> out;
  for (int n = 0; n < 4; ++n) {
    const auto& p = pts[static_cast<std::size_t>(n)];
    const double cz = std::cos(p.zeta), sz = std::sin(p.zeta);
    // Jacobian of the learning rule (symmetric, gradient flow)
    const double j11 = -4.0 * (d * d + s * s);
    const double j12 = -(d * cz + s * sz);
    const double j22 = -p.A * (s * cz - d * sz);
    const double tr = j11 + j22, det = j11 * j22 - j12 * j12;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    Equilibrium e;
    e.label = n + 1;
    e.point = p;
    e.eigenvalues = {0.5 * tr - disc, 0.5 * tr + disc};
    const double scale = 1e-12 * std::max(1.0, std::abs(tr));
    if (e.eigenvalues[1] > scale)
      e.stability = Stability::Unstable;
    else if (e.eigenvalues[1] < -scale)
      e.stability = Stability::Attracting;
    else
      e.stability = Stability::Neutral;
    out[static_cast<std::size_t>(n)] = e;
  }
  return out;
}

PolicyEntry integrate_learning_ode(PolicyEntry start, double omega, const ModelParams& params, double gamma_sq,
                                   double T, double dt) {
  const std::size_t K = step_count(T, dt);
  PolicyEntry p{start.A, wrap_phase(start.zeta)};
  for (std::size_t n = 0; n < K; ++n) {
    LossGradient f = learning_rhs(p, omega, params, gamma_sq);
    p.A += dt * f.dA;
    p.zeta = wrap_phase(p.zeta + dt * f.dzeta);
  }
  return p;
}

double policy_distance(const PolicyEntry& a, const PolicyEntry& b) {
  return std::hypot(a.A - b.A, angle_difference(a.zeta, b.zeta));
}

bool in_neighborhood(const PolicyEntry& alpha, const PolicyEntry& target, double fraction) {
  auto near = [&](double A, double zeta) {
    return std::abs(alpha.A - A) <= fraction * std::abs(target.A) &&
           std::abs(angle_difference(alpha.zeta, zeta)) <= fraction * kPi;
  };
  return near(target.A, target.zeta) || near(-target.A, target.zeta - kPi);
}

std::vector<PortraitRow> phase_portrait(double omega, const ModelParams& params, double A_min, double A_max,
                                        std::size_t n_A, std::size_t n_zeta) {
  if (n_A < 2 || n_zeta < 1) throw DomainError("invalid_params", "portrait grid too small");
  std::vector<PortraitRow> rows;
  rows.reserve(n_A * n_zeta);
  for (std::size_t i = 0; i < n_A; ++i) {
    const double A = A_min + (A_max - A_min) * static_cast<double>(i) / static_cast<double>(n_A - 1);
    for (std::size_t j = 0; j < n_zeta; ++j) {
      const double z = kTwoPi * static_cast<double>(j) / static_cast<double>(n_zeta);
      LossGradient f = learning_rhs({A, z}, omega, params, 1.0);
      rows.push_back({A, z, f.dA, f.dzeta});
    }
  }
  return rows;
}

void LearningExperimentConfig::validate() const {
  ModelParams p;
  p.N = N;
  p.gamma = gamma;
  p.sigma = sigma;
  p.kappa = kappa;
  p.epsilon = epsilon;
  p.R = R;
  p.wave_speed = wave_speed;
  p.dt = dt;
  p.validate();
  if (!(T > 0.0)) throw DomainError("invalid_params", "T must be positive");
  if (!std::isfinite(omega1) || !std::isfinite(A0) || !std::isfinite(zeta0))
    throw DomainError("invalid_params", "initial values must be finite");
}

LearningRun run_learning_experiment(const LearningExperimentConfig& cfg, std::uint64_t seed, std::size_t record_stride) {
  cfg.validate();
  if (record_stride == 0) throw DomainError("invalid_params", "record_stride must be >= 1");
  ModelParams params;
  params.N = cfg.N;
  params.gamma = cfg.gamma;
  params.sigma = cfg.sigma;
  params.kappa = cfg.kappa;
  params.epsilon = cfg.epsilon;
  params.R = cfg.R;
  params.wave_speed = cfg.wave_speed;
  params.dt = cfg.dt;

  PhaseEnsemble init = initial_ensemble(params, seed);
  std::vector<double> freqs = init.frequencies();
  freqs[0] = cfg.omega1;
  PhaseEnsemble ens(init.phases(), std::move(freqs));
  const NoiseSource noise{derive_seed(seed, "wiener")};

  LearningRun run;
  run.target = galerkin_params_closed(cfg.omega1, cfg.sigma, cfg.wave_speed);
  PolicyEntry alpha{cfg.A0, wrap_phase(cfg.zeta0)};
  const std::size_t K = step_count(cfg.T, cfg.dt);
  const std::size_t n = ens.size();
  std::vector<double> sn(n), cs(n), u(n);
  double g_sum = 0.0;
  bool inside = false;
  for (std::size_t k = 0; k <= K; ++k) {
    const auto& th = ens.phases();
    double S = 0.0, C = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sn[i] = std::sin(th[i]);
      cs[i] = std::cos(th[i]);
      S += sn[i];
      C += cs[i];
    }
    MeanField mf{S / static_cast<double>(n), C / static_cast<double>(n)};
    const double g2 = std::min(1.0, mf.gamma_sq());
    const double t = static_cast<double>(ens.step()) * cfg.dt;

    const bool now_inside = in_neighborhood(alpha, run.target);
    if (now_inside && !run.first_entry) run.first_entry = t;
    if (now_inside && !inside) run.settle_time = t;
    if (!now_inside) run.settle_time.reset();
    inside = now_inside;
    if (k % record_stride == 0 || k == K) run.samples.push_back({t, alpha.A, alpha.zeta, g2});
    if (k == K) break;
    g_sum += g2;

    u[0] = parameterized_control(th[0], mf, alpha, cfg.R);
    for (std::size_t i = 1; i < n; ++i) u[i] = -cfg.kappa * (sn[i] * mf.mean_cos - cs[i] * mf.mean_sin);

    LossGradient f = learning_rhs(alpha, cfg.omega1, params, g2);
    alpha.A += cfg.dt * f.dA;
    alpha.zeta = wrap_phase(alpha.zeta + cfg.dt * f.dzeta);
    ens = em_step(ens, u, params, noise);
  }
  run.mean_gamma_sq = K > 0 ? g_sum / static_cast<double>(K) : 0.0;
  run.final_policy = alpha;
  return run;
}

}  // namespace oscmfg

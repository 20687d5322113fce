#include "oscmfg/population.hpp"

#include <cmath>
#include <string>

#include "oscmfg/error.hpp"

namespace oscmfg {

double wrap_phase(double x) {
  if (!std::isfinite(x)) throw DomainError("non_finite", "cannot wrap a non-finite angle");
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double angle_difference(double a, double b) {
  double d = wrap_phase(a - b);
  return d >= kPi ? d - kTwoPi : d;
}

std::vector<double> sample_frequencies(double gamma, std::size_t N, const RandomStream& rng) {
  if (!(gamma >= 0.0)) throw DomainError("invalid_params", "gamma must be >= 0");
  std::vector<double> out(N, 1.0);
  if (gamma == 0.0) return out;
  for (std::size_t i = 0; i < N; ++i) out[i] = 1.0 - gamma + 2.0 * gamma * rng.uniform(i);
  return out;
}

MeanField MeanField::of(std::span<const double> phases) {
  MeanField mf;
  if (phases.empty()) return mf;
  double s = 0.0, c = 0.0;
  for (double th : phases) {
    s += std::sin(th);
    c += std::cos(th);
  }
  double n = static_cast<double>(phases.size());
  mf.mean_sin = s / n;
  mf.mean_cos = c / n;
  return mf;
}

double kuramoto_control(double theta, const MeanField& mf, double kappa) {
  // mean_j sin(theta - theta_j) = sin(theta) C - cos(theta) S
  return -kappa * (std::sin(theta) * mf.mean_cos - std::cos(theta) * mf.mean_sin);
}

double parameterized_control(double theta, const MeanField& mf, const PolicyEntry& policy, double R) {
  double x = theta - policy.zeta;
  return -(policy.A / R) * (std::sin(x) * mf.mean_cos - std::cos(x) * mf.mean_sin);
}

namespace {

void check_index(std::size_t i, const PhaseEnsemble& ensemble) {
  if (i >= ensemble.size()) throw DomainError("invalid_index", "oscillator index out of range");
}

}  // namespace

double kuramoto_control(std::size_t i, const PhaseEnsemble& ensemble, double kappa) {
  check_index(i, ensemble);
  const auto& th = ensemble.phases();
  double s = 0.0;
  for (double tj : th) s += std::sin(th[i] - tj);
  return -kappa * s / static_cast<double>(th.size());
}

double parameterized_control(std::size_t i, const PhaseEnsemble& ensemble, const PolicyEntry& policy, double R) {
  check_index(i, ensemble);
  const auto& th = ensemble.phases();
  double s = 0.0;
  for (double tj : th) s += std::sin(th[i] - tj - policy.zeta);
  return -(policy.A / R) * s / static_cast<double>(th.size());
}

std::vector<double> kuramoto_controls(const PhaseEnsemble& ensemble, double kappa) {
  MeanField mf = MeanField::of(ensemble.phases());
  std::vector<double> u(ensemble.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = kuramoto_control(ensemble.phases()[i], mf, kappa);
  return u;
}

PhaseEnsemble em_step(const PhaseEnsemble& ensemble, std::span<const double> controls, const ModelParams& params,
                      const NoiseSource& noise) {
  if (controls.size() != ensemble.size())
    throw DomainError("invalid_params", "controls length must equal the ensemble size");
  const auto& th = ensemble.phases();
  const auto& om = ensemble.frequencies();
  const double dt = params.dt;
  const double diff = params.sigma * std::sqrt(dt);
  std::vector<double> next(th.size());
  for (std::size_t i = 0; i < th.size(); ++i) {
    double xi = diff != 0.0 ? noise.gaussian(i, ensemble.step()) : 0.0;
    next[i] = wrap_phase(th[i] + (om[i] + controls[i]) * dt + diff * xi);
  }
  return ensemble.advanced(std::move(next), dt);
}

double order_parameter_sq(std::span<const double> phases) {
  if (phases.empty()) throw DomainError("invalid_params", "order parameter of an empty set");
  double g = MeanField::of(phases).gamma_sq();
  return g > 1.0 ? 1.0 : g;
}

double order_parameter_sq(const PhaseEnsemble& ensemble) { return order_parameter_sq(ensemble.phases()); }

double resultant_length(std::span<const double> phases) {
  if (phases.empty()) throw DomainError("invalid_params", "resultant of an empty set");
  return std::sqrt(MeanField::of(phases).gamma_sq());
}

double circular_mean(std::span<const double> phases) {
  if (phases.empty()) throw DomainError("undefined_mean", "circular mean of an empty set");
  MeanField mf = MeanField::of(phases);
  if (std::sqrt(mf.gamma_sq()) < 1e-12) throw DomainError("undefined_mean", "zero resultant, circular mean undefined");
  return wrap_phase(std::atan2(mf.mean_sin, mf.mean_cos));
}

CostBreakdown empirical_cost(const std::vector<PhaseSnapshot>& trajectory,
                             const std::vector<std::vector<double>>& controls, double R, const CostSpec& cost) {
  if (trajectory.size() < 2) throw DomainError("empty_trajectory", "need at least two recorded times");
  if (controls.size() + 1 < trajectory.size())
    throw DomainError("invalid_params", "control history shorter than the trajectory");
  const std::size_t N = trajectory.front().phases.size();
  const double horizon = trajectory.back().t - trajectory.front().t;
  if (N == 0 || !(horizon > 0.0)) throw DomainError("empty_trajectory", "trajectory has no oscillators or zero horizon");

  const std::size_t K = cost.max_harmonic();
  CostBreakdown out{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  std::vector<double> ms(K + 1), mc(K + 1);
  for (std::size_t n = 0; n + 1 < trajectory.size(); ++n) {
    const auto& th = trajectory[n].phases;
    const auto& u = controls[n];
    if (th.size() != N || u.size() != N) throw DomainError("invalid_params", "histories are not aligned");
    const double w = trajectory[n + 1].t - trajectory[n].t;
    if (!(w > 0.0)) throw DomainError("invalid_params", "recorded times must increase");
    for (std::size_t k = 1; k <= K; ++k) {
      double s = 0.0, c = 0.0;
      for (double x : th) {
        s += std::sin(static_cast<double>(k) * x);
        c += std::cos(static_cast<double>(k) * x);
      }
      ms[k] = s / static_cast<double>(N);
      mc[k] = c / static_cast<double>(N);
    }
    for (std::size_t i = 0; i < N; ++i) {
      // mean_j sum_k C_k cos(k(theta_i - theta_j)) via the population's harmonic moments
      double cbar = cost.coefficient(0);
      for (std::size_t k = 1; k <= K; ++k) {
        double a = static_cast<double>(k) * th[i];
        cbar += cost.coefficient(k) * (std::cos(a) * mc[k] + std::sin(a) * ms[k]);
      }
      out.state[i] += w * cbar;
      out.control[i] += w * 0.5 * R * u[i] * u[i];
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    out.state[i] /= horizon;
    out.control[i] /= horizon;
    out.total[i] = out.state[i] + out.control[i];
  }
  return out;
}

}  // namespace oscmfg

#include "oscmfg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oscmfg/error.hpp"

namespace oscmfg {

std::size_t step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("invalid_params", "horizon and step must be positive");
  return static_cast<std::size_t>(std::llround(T / dt));
}

PhaseEnsemble initial_ensemble(const ModelParams& params, std::uint64_t seed) {
  RandomStream phase_rng(derive_seed(seed, "initial-phases"), 0);
  RandomStream freq_rng(derive_seed(seed, "frequencies"), 0);
  std::vector<double> phases(params.N);
  for (std::size_t i = 0; i < params.N; ++i) phases[i] = kTwoPi * phase_rng.uniform(i);
  return PhaseEnsemble(std::move(phases), sample_frequencies(params.gamma, params.N, freq_rng));
}

namespace {

SimulationRecord make_record(const PhaseEnsemble& ens, const MeanField& mf, const std::vector<double>& u,
                             bool with_phases, double dt) {
  SimulationRecord r;
  r.t = static_cast<double>(ens.step()) * dt;
  r.gamma_sq = std::min(1.0, mf.gamma_sq());
  r.mean_phase = std::sqrt(mf.gamma_sq()) < 1e-12 ? std::numeric_limits<double>::quiet_NaN()
                                                  : wrap_phase(std::atan2(mf.mean_sin, mf.mean_cos));
  if (with_phases) {
    r.phases = ens.phases();
    r.controls = u;
  }
  return r;
}

}  // namespace

SimulationResult simulate_kuramoto(const ModelParams& params, const SimulationOptions& options) {
  params.validate();
  if (options.record_stride == 0) throw DomainError("invalid_params", "record_stride must be >= 1");
  const std::size_t K = step_count(options.T, params.dt);
  const NoiseSource noise{derive_seed(options.seed, "wiener")};

  PhaseEnsemble ens = initial_ensemble(params, options.seed);
  SimulationResult result{{}, 0.0, ens};
  std::vector<double> u(ens.size());
  double g_sum = 0.0;
  for (std::size_t n = 0; n <= K; ++n) {
    MeanField mf = MeanField::of(ens.phases());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = kuramoto_control(ens.phases()[i], mf, params.kappa);
    if (n % options.record_stride == 0 || n == K) result.records.push_back(make_record(ens, mf, u, options.record_phases, params.dt));
    if (n == K) break;
    g_sum += mf.gamma_sq();
    ens = em_step(ens, u, params, noise);
  }
  result.mean_gamma_sq = K > 0 ? g_sum / static_cast<double>(K) : 0.0;
  result.final_state = ens;
  return result;
}

}  // namespace oscmfg

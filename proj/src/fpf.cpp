#include "oscmfg/fpf.hpp"

#include <algorithm>
#include <cmath>

#include "oscmfg/error.hpp"
#include "oscmfg/population.hpp"
#include "oscmfg/simulate.hpp"

namespace oscmfg {

double ObservationFunction::operator()(double theta) const {
  switch (kind) {
    case ObservationKind::Cos: return std::cos(theta - shift);
    case ObservationKind::Sin: return std::sin(theta - shift);
    case ObservationKind::Zero: return 0.0;
    case ObservationKind::Constant: return level;
  }
  return 0.0;
}

std::string ObservationFunction::tag() const {
  switch (kind) {
    case ObservationKind::Cos: return "cos";
    case ObservationKind::Sin: return "sin";
    case ObservationKind::Zero: return "zero";
    case ObservationKind::Constant: return "constant";
  }
  return "cos";
}

ObservationKind ObservationFunction::parse_kind(const std::string& tag) {
  if (tag == "cos") return ObservationKind::Cos;
  if (tag == "sin") return ObservationKind::Sin;
  if (tag == "zero") return ObservationKind::Zero;
  if (tag == "constant") return ObservationKind::Constant;
  throw DomainError("invalid_params", "unknown observation function '" + tag + "'");
}

void FilterConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError("invalid_params", what);
  };
  require(std::isfinite(omega0), "omega0 must be finite");
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be >= 0");
  require(std::isfinite(sigma_B) && sigma_B >= 0.0, "sigma_B must be >= 0");
  require(std::isfinite(gamma_f) && gamma_f >= 0.0, "gamma_f must be >= 0");
  require(N >= 2, "N must be at least 2");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  require(std::isfinite(T) && T > 0.0, "T must be positive");
  require(std::isfinite(theta0), "theta0 must be finite");
  require(std::isfinite(h.shift) && std::isfinite(h.level), "observation parameters must be finite");
}

ObservationPath synthesize_observations(const FilterConfig& config, double T, std::uint64_t seed) {
  config.validate();
  const std::size_t K = step_count(T, config.dt);
  const RandomStream signal(derive_seed(seed, "signal"), 0);
  const RandomStream channel(derive_seed(seed, "observation"), 0);
  const double sq = std::sqrt(config.dt);
  ObservationPath path;
  path.dt = config.dt;
  path.seed = seed;
  path.t.resize(K + 1);
  path.theta.resize(K + 1);
  path.dz.resize(K);
  double B = 0.0;  // Wiener path of the signal
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    path.t[k] = t;
    path.theta[k] = wrap_phase(config.theta0 + config.omega0 * t + config.sigma * B);
    if (k == K) break;
    path.dz[k] = config.h(path.theta[k]) * config.dt + sq * channel.gaussian(k);
    if (config.sigma != 0.0) B += sq * signal.gaussian(k);
  }
  return path;
}

GainCoeffs galerkin_gain(const ParticleCloud& cloud, const ObservationFunction& h) {
  const std::size_t N = cloud.phases.size();
  if (N < 2) throw DomainError("invalid_params", "gain needs at least two particles");
  std::vector<double> hv(N);
  double h_hat = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    hv[i] = h(cloud.phases[i]);
    h_hat += hv[i];
  }
  h_hat /= static_cast<double>(N);
  double ss = 0.0, sc = 0.0, cc = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double s = std::sin(cloud.phases[i]), c = std::cos(cloud.phases[i]);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    b1 += (hv[i] - h_hat) * c;
    b2 += (hv[i] - h_hat) * s;
  }
  const double n = static_cast<double>(N);
  // A_kl = mean psi_l' psi_k' with psi = (cos, sin)
  double a11 = ss / n, a12 = -sc / n, a22 = cc / n;
  b1 /= n;
  b2 /= n;
  GainCoeffs g;
  g.h_hat = h_hat;
  const double tr = a11 + a22, det = a11 * a22 - a12 * a12;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double lmax = 0.5 * tr + disc, lmin = 0.5 * tr - disc;
  g.condition = lmin > 0.0 ? lmax / lmin : INFINITY;
  if (g.condition > 1e8) {
    g.degenerate = true;
    a11 += 1e-8;
    a22 += 1e-8;
  }
  const double dd = a11 * a22 - a12 * a12;
  g.kappa1 = (a22 * b1 - a12 * b2) / dd;
  g.kappa2 = (a11 * b2 - a12 * b1) / dd;
  return g;
}

ParticleCloud fpf_step_with_gain(const ParticleCloud& cloud, double dz, const FilterConfig& config,
                                 const NoiseSource& noise, const std::function<double(double)>& K, double h_hat) {
  const std::size_t N = cloud.phases.size();
  if (cloud.frequencies.size() != N) throw DomainError("invalid_params", "one frequency per particle required");
  const double dt = config.dt;
  const double diff = config.sigma_B * std::sqrt(dt);
  ParticleCloud next{std::vector<double>(N), cloud.frequencies, cloud.time + dt, cloud.step + 1};
  for (std::size_t i = 0; i < N; ++i) {
    const double th = cloud.phases[i];
    const double xi = diff != 0.0 ? noise.gaussian(i, cloud.step) : 0.0;
    const double base = th + cloud.frequencies[i] * dt + diff * xi;
    const double innov = dz - 0.5 * (config.h(th) + h_hat) * dt;
    const double k0 = K(th);
    const double k1 = K(base + k0 * innov);
    next.phases[i] = wrap_phase(base + 0.5 * (k0 + k1) * innov);
  }
  return next;
}

ParticleCloud fpf_step(const ParticleCloud& cloud, double dz, const FilterConfig& config, const NoiseSource& noise) {
  GainCoeffs g = galerkin_gain(cloud, config.h);
  return fpf_step_with_gain(cloud, dz, config, noise, [&g](double th) { return g.gain(th); }, g.h_hat);
}

Estimate estimate(const ParticleCloud& cloud) {
  if (cloud.phases.empty()) throw DomainError("undefined_estimate", "empty particle cloud");
  MeanField mf = MeanField::of(cloud.phases);
  const double r = std::min(1.0, std::sqrt(mf.gamma_sq()));
  if (r < 1e-12) throw DomainError("undefined_estimate", "zero resultant, posterior mean undefined");
  return {wrap_phase(std::atan2(mf.mean_sin, mf.mean_cos)), std::sqrt(-2.0 * std::log(r)), r};
}

ParticleCloud initial_cloud(const FilterConfig& config, std::uint64_t seed) {
  const RandomStream prng(derive_seed(seed, "particle-phases"), 0);
  const RandomStream frng(derive_seed(seed, "particle-frequencies"), 0);
  ParticleCloud c;
  c.phases.resize(config.N);
  c.frequencies.resize(config.N);
  for (std::size_t i = 0; i < config.N; ++i) {
    c.phases[i] = kTwoPi * prng.uniform(i);
    c.frequencies[i] = config.omega0 + config.gamma_f * (2.0 * frng.uniform(i) - 1.0);
  }
  return c;
}

std::vector<double> phase_histogram(std::span<const double> phases, std::size_t n_bins) {
  if (n_bins == 0) throw DomainError("invalid_params", "need at least one bin");
  std::vector<double> hist(n_bins, 0.0);
  if (phases.empty()) return hist;
  const double width = kTwoPi / static_cast<double>(n_bins);
  for (double th : phases) {
    auto b = static_cast<std::size_t>(wrap_phase(th) / width);
    hist[std::min(b, n_bins - 1)] += 1.0;
  }
  for (double& v : hist) v /= static_cast<double>(phases.size()) * width;
  return hist;
}

FpfRun run_fpf_experiment(const FilterConfig& config, std::uint64_t seed, std::size_t record_stride,
                          std::span<const double> snapshot_times, std::size_t n_bins) {
  config.validate();
  if (record_stride == 0) throw DomainError("invalid_params", "record_stride must be >= 1");
  ObservationPath obs = synthesize_observations(config, config.T, seed);
  ParticleCloud cloud = initial_cloud(config, seed);
  const NoiseSource noise{derive_seed(seed, "particle-noise")};
  const std::size_t K = obs.dz.size();

  std::vector<std::size_t> snap_steps;
  for (double t : snapshot_times) snap_steps.push_back(static_cast<std::size_t>(std::llround(t / config.dt)));

  FpfRun run;
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    for (std::size_t s : snap_steps)
      if (s == k) run.snapshots.push_back({obs.t[k], phase_histogram(cloud.phases, n_bins)});
    if (k == K) break;
    GainCoeffs g = galerkin_gain(cloud, config.h);
    FpfRow row{obs.t[k], obs.theta[k], NAN, NAN, g.kappa1, g.kappa2, obs.dz[k]};
    double err = kPi;
    try {
      Estimate e = estimate(cloud);
      row.theta_hat = e.theta_hat;
      row.spread = e.spread;
      err = angle_difference(e.theta_hat, obs.theta[k]);
    } catch (const DomainError&) {
    }
    if (obs.t[k] >= 0.25 * config.T) {
      sq += err * err;
      ++count;
    }
    if (k % record_stride == 0) run.rows.push_back(row);
    cloud = fpf_step_with_gain(cloud, obs.dz[k], config, noise, [&g](double th) { return g.gain(th); }, g.h_hat);
  }
  run.rmse = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  return run;
}

}  // namespace oscmfg

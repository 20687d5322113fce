#include "oscmfg/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "oscmfg/error.hpp"
#include "oscmfg/population.hpp"
#include "oscmfg/spectral.hpp"

namespace oscmfg {

GridDensity::GridDensity(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("invalid_params", "grid density needs at least one point");
}

GridDensity GridDensity::uniform(std::size_t M) { return GridDensity(std::vector<double>(M, 1.0 / kTwoPi)); }

GridDensity GridDensity::from_function(std::size_t M, const std::function<double(double)>& f) {
  GridDensity d(std::vector<double>(M, 0.0));
  for (std::size_t j = 0; j < M; ++j) d.values_[j] = f(d.theta(j));
  d.normalize();
  return d;
}

double GridDensity::spacing() const { return kTwoPi / static_cast<double>(values_.size()); }

double GridDensity::integral() const {
  return spacing() * std::accumulate(values_.begin(), values_.end(), 0.0);
}

void GridDensity::normalize() {
  const double z = integral();
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("unsupported_density", "density has no positive mass");
  for (double& v : values_) v /= z;
}

double GridDensity::at(double theta) const {
  const double x = wrap_phase(theta) / spacing();
  const std::size_t M = values_.size();
  const auto j = std::min(static_cast<std::size_t>(x), M - 1);
  const double f = x - static_cast<double>(j);
  return (1.0 - f) * values_[j] + f * values_[(j + 1) % M];
}

KsGridFilter::KsGridFilter(const FilterConfig& config, GridDensity initial)
    : config_(config), p_(std::move(initial)), h_(p_.size()), scratch_(p_.size()) {
  config_.validate();
  check_cfl(config_, p_.size());
  for (std::size_t j = 0; j < h_.size(); ++j) h_[j] = config_.h(p_.theta(j));
}

void KsGridFilter::check_cfl(const FilterConfig& config, std::size_t M) {
  if (M < 3) throw DomainError("invalid_params", "grid needs at least 3 points");
  const double dth = kTwoPi / static_cast<double>(M);
  const double adv = std::abs(config.omega0) * config.dt / dth;
  const double dif = config.sigma * config.sigma * config.dt / (dth * dth);
  if (adv > 1.0 || dif > 0.5) {
    double m_adv = config.omega0 != 0.0 ? kTwoPi / (std::abs(config.omega0) * config.dt) : INFINITY;
    double m_dif = config.sigma != 0.0 ? kTwoPi * std::sqrt(0.5 / (config.sigma * config.sigma * config.dt)) : INFINITY;
    auto m_max = static_cast<long long>(std::floor(std::min(m_adv, m_dif)));
    throw DomainError("cfl", "explicit grid filter unstable for M = " + std::to_string(M) +
                                 " (advection number " + std::to_string(adv) + ", diffusion number " +
                                 std::to_string(dif) + "); required M <= " + std::to_string(m_max));
  }
}

void KsGridFilter::fpk_step() {
  auto& p = p_.values();
  const std::size_t M = p.size();
  const double dth = p_.spacing();
  const double c = config_.omega0 * config_.dt / dth;
  if (c != 0.0) {
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t jm = (j + M - 1) % M, jp = (j + 1) % M;
      scratch_[j] = c > 0.0 ? p[j] - c * (p[j] - p[jm]) : p[j] - c * (p[jp] - p[j]);
    }
    p.swap(scratch_);
  }
  const double D = 0.5 * config_.sigma * config_.sigma * config_.dt / (dth * dth);
  if (D != 0.0) {
    for (std::size_t j = 0; j < M; ++j) scratch_[j] = p[j] + D * (p[(j + 1) % M] - 2.0 * p[j] + p[(j + M - 1) % M]);
    p.swap(scratch_);
  }
}

void KsGridFilter::correct(double dz) {
  auto& p = p_.values();
  const double dth = p_.spacing();
  double hbar = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) hbar += h_[j] * p[j];
  hbar *= dth;
  const double innov = dz - hbar * config_.dt;
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::max(0.0, p[j] * (1.0 + (h_[j] - hbar) * innov));
  p_.normalize();
}

KsRun ks_grid_filter(const ObservationPath& observations, const FilterConfig& config, std::size_t M,
                     std::optional<GridDensity> initial, std::size_t record_stride) {
  if (std::abs(observations.dt - config.dt) > 1e-15 * config.dt)
    throw DomainError("invalid_params", "observation path and filter must share dt");
  if (record_stride == 0) throw DomainError("invalid_params", "record_stride must be >= 1");
  GridDensity p0 = initial ? *initial : GridDensity::uniform(M);
  if (p0.size() != M) throw DomainError("invalid_params", "initial density has the wrong grid size");
  KsGridFilter filter(config, std::move(p0));
  KsRun run;
  run.t.push_back(observations.t.empty() ? 0.0 : observations.t.front());
  run.densities.push_back(filter.density());
  for (std::size_t k = 0; k < observations.dz.size(); ++k) {
    filter.step(observations.dz[k]);
    if ((k + 1) % record_stride == 0 || k + 1 == observations.dz.size()) {
      run.t.push_back(observations.t[k + 1]);
      run.densities.push_back(filter.density());
    }
  }
  return run;
}

namespace {

// Fourth-order periodic central difference.
std::vector<double> periodic_derivative(const std::vector<double>& f, double dth) {
  const std::size_t M = f.size();
  std::vector<double> d(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double fm2 = f[(j + M - 2) % M], fm1 = f[(j + M - 1) % M];
    const double fp1 = f[(j + 1) % M], fp2 = f[(j + 2) % M];
    d[j] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * dth);
  }
  return d;
}

// Integral of f over [theta_j, theta_{j+1}]: trapezoid with endpoint correction.
double cell_integral(const std::vector<double>& f, const std::vector<double>& df, std::size_t j, double dth) {
  const std::size_t jp = (j + 1) % f.size();
  return 0.5 * dth * (f[j] + f[jp]) - dth * dth / 12.0 * (df[jp] - df[j]);
}

std::vector<double> centered_rhs(const GridDensity& density, std::span<const double> h_values) {
  const auto& p = density.values();
  if (h_values.size() != p.size()) throw DomainError("invalid_params", "h must be sampled on the density grid");
  const double dth = density.spacing();
  double mass = 0.0, h_hat = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    mass += p[j] * dth;
    h_hat += h_values[j] * p[j] * dth;
  }
  h_hat /= mass;
  std::vector<double> g(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) g[j] = (h_values[j] - h_hat) * p[j] / mass;
  return g;
}

}  // namespace

PoissonGain poisson_gain_grid(const GridDensity& density, std::span<const double> h_values) {
  const auto& p = density.values();
  const std::size_t M = p.size();
  if (M < 5) throw DomainError("invalid_params", "grid needs at least 5 points");
  for (double v : p)
    if (!(v >= 1e-12)) throw DomainError("unsupported_density", "density must stay above 1e-12 on the grid");
  const double dth = density.spacing();
  const double mass = density.integral();
  const std::vector<double> g = centered_rhs(density, h_values);
  const std::vector<double> dg = periodic_derivative(g, dth);

  // p phi' = F + C with F' = -g
  std::vector<double> F(M, 0.0);
  for (std::size_t j = 0; j + 1 < M; ++j) F[j + 1] = F[j] - cell_integral(g, dg, j, dth);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    const double pj = p[j] / mass;
    num += F[j] / pj;
    den += 1.0 / pj;
  }
  const double C = -num / den;
  PoissonGain out{std::vector<double>(M), std::vector<double>(M, 0.0)};
  for (std::size_t j = 0; j < M; ++j) out.K[j] = (F[j] + C) / (p[j] / mass);

  const std::vector<double> dK = periodic_derivative(out.K, dth);
  for (std::size_t j = 0; j + 1 < M; ++j) out.phi[j + 1] = out.phi[j] + cell_integral(out.K, dK, j, dth);
  const double mean = std::accumulate(out.phi.begin(), out.phi.end(), 0.0) / static_cast<double>(M);
  for (double& v : out.phi) v -= mean;
  return out;
}

std::vector<double> poisson_residual(const GridDensity& density, std::span<const double> h_values,
                                     std::span<const double> K) {
  const auto& p = density.values();
  const std::size_t M = p.size();
  if (K.size() != M) throw DomainError("invalid_params", "gain must be sampled on the density grid");
  const double dth = density.spacing();
  const double mass = density.integral();
  const std::vector<double> g = centered_rhs(density, h_values);
  const std::vector<double> dg = periodic_derivative(g, dth);
  std::vector<double> r(M);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t jp = (j + 1) % M;
    const double flux = (p[jp] * K[jp] - p[j] * K[j]) / mass;
    r[j] = -flux / dth - cell_integral(g, dg, j, dth) / dth;
  }
  return r;
}

std::pair<double, double> gain_first_harmonic(const GridDensity& density, std::span<const double> K) {
  const auto& p = density.values();
  if (K.size() != p.size()) throw DomainError("invalid_params", "gain must be sampled on the density grid");
  double g11 = 0.0, g12 = 0.0, g22 = 0.0, r1 = 0.0, r2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double s = std::sin(density.theta(j)), c = std::cos(density.theta(j));
    g11 += p[j] * s * s;
    g12 -= p[j] * s * c;
    g22 += p[j] * c * c;
    r1 -= p[j] * K[j] * s;
    r2 += p[j] * K[j] * c;
  }
  const double det = g11 * g22 - g12 * g12;
  if (!(std::abs(det) > 0.0)) throw DomainError("unsupported_density", "degenerate projection");
  return {(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det};
}

std::complex<double> adaptive_characteristic_integral(std::complex<double> lambda, double R, int k,
                                                      const ModelParams& params, const CostSpec& cost,
                                                      double* error_estimate) {
  if (k == 0) throw DomainError("invalid_params", "harmonic k must be non-zero");
  if (!(R > 0.0)) throw DomainError("invalid_params", "R must be positive");
  const double c = cost.coefficient(static_cast<std::size_t>(std::abs(k)));
  if (c == 0.0) throw DomainError("empty_discrete_spectrum", "cost coefficient of this harmonic is zero");
  const double kk = static_cast<double>(k);
  const double a = 0.5 * params.sigma_sq() * kk * kk;
  const double gamma = params.gamma;

  // pole proximity, measured in the lambda plane
  const double lo = std::min(-kk * (1.0 - gamma), -kk * (1.0 + gamma));
  const double hi = std::max(-kk * (1.0 - gamma), -kk * (1.0 + gamma));
  for (double re : {a, -a}) {
    const double y = lambda.imag();
    const double dy = y < lo ? lo - y : (y > hi ? y - hi : 0.0);
    if (std::hypot(lambda.real() - re, dy) < 1e-6)
      throw DomainError("pole_proximity", "lambda within 1e-6 of the continuous spectrum");
  }

  auto integrand = [&](double omega) {
    const std::complex<double> x = lambda + std::complex<double>(0.0, kk * omega);
    return 1.0 / ((x - a) * (x + a));
  };
  std::complex<double> I;
  double err = 0.0;
  if (gamma == 0.0) {
    I = integrand(1.0);
  } else {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double g = 1.0 / (2.0 * gamma);
    double er = 0.0, ei = 0.0, l1r = 0.0, l1i = 0.0;
    const double re =
        GK::integrate([&](double w) { return g * integrand(w).real(); }, 1.0 - gamma, 1.0 + gamma, 15, 1e-14, &er, &l1r);
    const double im =
        GK::integrate([&](double w) { return g * integrand(w).imag(); }, 1.0 - gamma, 1.0 + gamma, 15, 1e-14, &ei, &l1i);
    I = {re, im};
    err = std::hypot(er, ei);
  }
  const double pref = c * kk * kk / (2.0 * R);
  if (error_estimate) *error_estimate = std::abs(pref) * err;
  return pref * I - 1.0;
}

std::vector<double> sample_from_density(const GridDensity& density, std::size_t N, const RandomStream& rng,
                                        bool stratified) {
  const auto& p = density.values();
  const std::size_t M = p.size();
  const double dth = density.spacing();
  std::vector<double> cdf(M + 1, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    if (p[j] < 0.0) throw DomainError("unsupported_density", "negative density value");
    cdf[j + 1] = cdf[j] + 0.5 * dth * (p[j] + p[(j + 1) % M]);
  }
  const double total = cdf[M];
  if (!(total > 0.0)) throw DomainError("unsupported_density", "density has no mass");
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    double u = rng.uniform(i);
    if (stratified) u = (static_cast<double>(i) + u) / static_cast<double>(N);
    const double target = u * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    std::size_t j = static_cast<std::size_t>(std::distance(cdf.begin(), it)) - 1;
    j = std::min(j, M - 1);
    // invert the linear density on the cell
    const double m = target - cdf[j];
    const double p0 = p[j], slope = (p[(j + 1) % M] - p[j]) / dth;
    double x;
    if (std::abs(slope) < 1e-14 * std::max(1.0, p0))
      x = p0 > 0.0 ? m / p0 : 0.0;
    else
      x = (-p0 + std::sqrt(std::max(0.0, p0 * p0 + 2.0 * slope * m))) / slope;
    out[i] = wrap_phase(density.theta(j) + std::clamp(x, 0.0, dth));
  }
  return out;
}

double total_variation(const GridDensity& density, std::span<const double> particles, std::size_t n_bins) {
  const auto& p = density.values();
  const std::size_t M = p.size();
  if (n_bins == 0 || M % n_bins != 0) throw DomainError("invalid_params", "bins must divide the grid size");
  if (particles.empty()) throw DomainError("invalid_params", "no particles");
  const std::size_t per = M / n_bins;
  const double dth = density.spacing();
  const double total = density.integral();
  const std::vector<double> hist = phase_histogram(particles, n_bins);
  const double width = kTwoPi / static_cast<double>(n_bins);
  double tv = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    double mass = 0.0;
    for (std::size_t j = b * per; j < (b + 1) * per; ++j) mass += 0.5 * dth * (p[j] + p[(j + 1) % M]);
    tv += std::abs(hist[b] * width - mass / total);
  }
  return 0.5 * tv;
}

OracleComparison compare_fpf_with_ks(const FilterConfig& config, std::uint64_t seed, GainSource gain, std::size_t M,
                                     std::size_t n_bins) {
  config.validate();
  KsGridFilter::check_cfl(config, M);
  const ObservationPath obs = synthesize_observations(config, config.T, seed);
  ParticleCloud cloud = initial_cloud(config, seed);
  const NoiseSource noise{derive_seed(seed, "particle-noise")};
  KsGridFilter ks(config, GridDensity::uniform(M));
  std::vector<double> hgrid(M);
  for (std::size_t j = 0; j < M; ++j) hgrid[j] = config.h(ks.density().theta(j));

  OracleComparison out;
  double sum = 0.0;
  for (std::size_t k = 0; k < obs.dz.size(); ++k) {
    if (gain == GainSource::Galerkin) {
      cloud = fpf_step(cloud, obs.dz[k], config, noise);
    } else {
      double h_hat = 0.0;
      for (double th : cloud.phases) h_hat += config.h(th);
      h_hat /= static_cast<double>(cloud.phases.size());
      // floor the tails so the Poisson solve stays defined
      GridDensity floored = ks.density();
      for (double& v : floored.values()) v = std::max(v, 1e-12);
      GridDensity K(poisson_gain_grid(floored, hgrid).K);
      cloud = fpf_step_with_gain(cloud, obs.dz[k], config, noise, [&K](double th) { return K.at(th); }, h_hat);
    }
    ks.step(obs.dz[k]);
    const double tv = total_variation(ks.density(), cloud.phases, n_bins);
    out.t.push_back(obs.t[k + 1]);
    out.tv.push_back(tv);
    sum += tv;
  }
  out.mean_tv = out.tv.empty() ? 0.0 : sum / static_cast<double>(out.tv.size());
  out.final_density = ks.density();
  out.final_particles = cloud.phases;
  return out;
}

}  // namespace oscmfg

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oscmfg/fpf.hpp"
#include "oscmfg/model.hpp"
#include "oscmfg/random.hpp"

namespace oscmfg {

// Density values on theta_j = j * 2pi / M, j = 0..M-1 (periodic).
class GridDensity {
 public:
  explicit GridDensity(std::vector<double> values);
  static GridDensity uniform(std::size_t M);
  // Samples f on the grid and normalizes.
  static GridDensity from_function(std::size_t M, const std::function<double(double)>& f);

  std::size_t size() const { return values_.size(); }
  double spacing() const;
  double theta(std::size_t j) const { return spacing() * static_cast<double>(j); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  // Periodic trapezoid integral.
  double integral() const;
  void normalize();
  // Periodic linear interpolation.
  double at(double theta) const;

 private:
  std::vector<double> values_;
};

// Grid Kushner-Stratonovich filter for the true signal model (omega0, sigma).
// Each step: upwind advection, central diffusion, then multiplicative
// observation correction with clipping and renormalization.
class KsGridFilter {
 public:
  KsGridFilter(const FilterConfig& config, GridDensity initial);

  // Throws DomainError("cfl") with the admissible grid size if the explicit
  // scheme is unstable for (omega0, sigma, dt, M).
  static void check_cfl(const FilterConfig& config, std::size_t M);

  void fpk_step();
  void correct(double dz);
  void step(double dz) {
    fpk_step();
    correct(dz);
  }
  const GridDensity& density() const { return p_; }

 private:
  FilterConfig config_;
  GridDensity p_;
  std::vector<double> h_;
  std::vector<double> scratch_;
};

struct KsRun {
  std::vector<double> t;
  std::vector<GridDensity> densities;
};

// Densities at t_0 (initial) and after every record_stride-th step.
KsRun ks_grid_filter(const ObservationPath& observations, const FilterConfig& config, std::size_t M = 512,
                     std::optional<GridDensity> initial = std::nullopt, std::size_t record_stride = 1);

struct PoissonGain {
  std::vector<double> K;    // gain phi' on the grid
  std::vector<double> phi;  // potential with zero mean
};

// Solves -(p phi')' = (h - h_hat) p on the circle by two antiderivatives.
// Throws DomainError("unsupported_density") if p drops below 1e-12.
PoissonGain poisson_gain_grid(const GridDensity& density, std::span<const double> h_values);

// Discrete residual of the scheme used by poisson_gain_grid.
std::vector<double> poisson_residual(const GridDensity& density, std::span<const double> h_values,
                                     std::span<const double> K);

// Density-weighted least-squares fit of K by -k1 sin + k2 cos, i.e. the
// infinite-particle limit of the Galerkin gain.
std::pair<double, double> gain_first_harmonic(const GridDensity& density, std::span<const double> K);

// Characteristic residual by adaptive Gauss-Kronrod quadrature, independent of
// the fixed-node evaluator. Rejects lambda within 1e-6 of the continuous spectrum.
std::complex<double> adaptive_characteristic_integral(std::complex<double> lambda, double R, int k,
                                                      const ModelParams& params, const CostSpec& cost,
                                                      double* error_estimate = nullptr);

// Inverse-CDF samples. Stratified: one sample per probability stratum [i/N, (i+1)/N).
std::vector<double> sample_from_density(const GridDensity& density, std::size_t N, const RandomStream& rng,
                                        bool stratified = false);

// Total variation between the particle histogram and the grid density on
// n_bins equal bins (M must be a multiple of n_bins).
double total_variation(const GridDensity& density, std::span<const double> particles, std::size_t n_bins);

enum class GainSource { Galerkin, Exact };

struct OracleComparison {
  std::vector<double> t;
  std::vector<double> tv;
  double mean_tv = 0.0;
  GridDensity final_density{std::vector<double>(1, 1.0 / kTwoPi)};
  std::vector<double> final_particles;
};

// Runs the particle filter and the grid filter on the same observation path.
// With GainSource::Exact the particles use the grid Poisson gain of the
// oracle density instead of the Galerkin approximation.
OracleComparison compare_fpf_with_ks(const FilterConfig& config, std::uint64_t seed, GainSource gain,
                                     std::size_t M = 512, std::size_t n_bins = 32);

}  // namespace oscmfg

#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "oscmfg/error.hpp"
#include "oscmfg/model.hpp"

namespace oscmfg {

using cplx = std::complex<double>;

// {lambda = real_part + i y : y in [imag_lo, imag_hi]}
struct SpectrumSegment {
  int harmonic = 1;
  double real_part = 0.0;
  double imag_lo = 0.0;
  double imag_hi = 0.0;

  double distance(cplx z) const;
};

// Continuous spectrum of harmonic k: real parts +/- sigma^2 k^2 / 2, imaginary
// parts -k omega for omega in [1 - gamma, 1 + gamma]. Throws for k = 0.
std::array<SpectrumSegment, 2> continuous_spectrum(int k, double sigma, double gamma);

// Integral over the frequency law of 1 / ((lambda - a + i k w)(lambda + a + i k w)),
// a = sigma^2 k^2 / 2, together with its lambda-derivative. Composite 64-node
// Gauss-Legendre with panels refined near the integrand poles.
struct IntegralEval {
  cplx value;
  cplx derivative;
};
IntegralEval characteristic_integral(cplx lambda, int k, double sigma, double gamma);

struct ResidualEval {
  cplx value;
  cplx derivative;
};

// C_|k| k^2 / (2R) * integral - 1. Throws DomainError("empty_discrete_spectrum")
// when C_|k| = 0 and DomainError("on_continuous_spectrum") on a pole.
cplx characteristic_residual(cplx lambda, double R, int k, const ModelParams& params, const CostSpec& cost);
ResidualEval characteristic_residual_with_derivative(cplx lambda, double R, int k, const ModelParams& params,
                                                     const CostSpec& cost);

enum class Branch { Right, Left };

struct EigenSample {
  double R = 0.0;
  cplx lambda;
  double residual = 0.0;  // |characteristic residual| at lambda
};

struct EigenPath {
  int harmonic = 1;
  std::vector<EigenSample> samples;
  std::optional<double> critical_R;
};

class PathLostError : public DomainError {
 public:
  PathLostError(const std::string& message, EigenPath partial)
      : DomainError("path_lost", message), partial_(std::move(partial)) {}
  const EigenPath& partial() const { return partial_; }

 private:
  EigenPath partial_;
};

// Damped complex Newton on the characteristic residual. Empty on failure.
std::optional<cplx> solve_characteristic(cplx seed, double R, int k, const ModelParams& params,
                                         const CostSpec& cost);

// Starting point of a branch: (1 - 0.05) * (+/- sigma^2 k^2 / 2) - i k, i.e. the
// continuous-spectrum midpoint pulled slightly toward the imaginary axis.
cplx branch_seed(int k, const ModelParams& params, Branch branch);

// Decreasing grid R_{n+1} = 0.98 R_n. The first R is the one for which
// branch_seed is an exact root; the grid stops once R < floor_fraction * R_0.
std::vector<double> default_R_grid(int k, const ModelParams& params, const CostSpec& cost,
                                   double floor_fraction = 0.05);

// Continuation along a decreasing R grid. When the path reaches the imaginary
// axis the crossing is refined by bisection and stored in critical_R.
// Throws PathLostError with the samples found so far if Newton fails.
EigenPath discrete_eigenpath(int k, std::span<const double> R_grid, const ModelParams& params,
                             const CostSpec& cost, Branch branch = Branch::Right);

double critical_R_numeric(double gamma, double sigma, int k = 1, const CostSpec& cost = CostSpec::kuramoto());
double critical_R_closed(double gamma, double sigma);
double critical_kappa(double gamma, double sigma);

struct BifurcationRow {
  double gamma = 0.0;
  double R_c_closed = 0.0;
  double R_c_numeric = 0.0;
  double kappa_c = 0.0;
};
std::vector<BifurcationRow> bifurcation_table(std::span<const double> gammas, double sigma);

}  // namespace oscmfg

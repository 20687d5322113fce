#include "oscmfg/model.hpp"

#include <string>

#include "oscmfg/error.hpp"
#include "oscmfg/population.hpp"

namespace oscmfg {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError("invalid_params", what);
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(std::isfinite(R) && R > 0.0, "R must be positive");
  require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be non-negative");
  require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be non-negative");
  require(std::isfinite(wave_speed), "wave_speed must be finite");
  require(gamma > 0.0 || wave_speed == 1.0, "wave_speed must be 1 for a homogeneous population");
  require(N >= 1, "N must be at least 1");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
}

FrequencyDistribution::FrequencyDistribution(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("invalid_params", "gamma must be >= 0");
}

double FrequencyDistribution::density(double omega) const {
  if (is_point_mass()) throw DomainError("invalid_params", "point mass has no density");
  return (omega >= lower() && omega <= upper()) ? 1.0 / (2.0 * gamma_) : 0.0;
}

CostSpec::CostSpec(std::vector<double> fourier) : fourier_(std::move(fourier)) {
  for (double c : fourier_)
    if (!std::isfinite(c)) throw DomainError("invalid_params", "cost coefficients must be finite");
}

CostSpec CostSpec::kuramoto() { return CostSpec({0.25, -0.25}); }

bool CostSpec::first_harmonic_only() const {
  for (std::size_t k = 2; k < fourier_.size(); ++k)
    if (fourier_[k] != 0.0) return false;
  return true;
}

double CostSpec::operator()(double x) const {
  double v = coefficient(0);
  for (std::size_t k = 1; k < fourier_.size(); ++k) v += fourier_[k] * std::cos(static_cast<double>(k) * x);
  return v;
}

PhaseEnsemble::PhaseEnsemble(std::vector<double> phases, std::vector<double> frequencies, double time,
                             std::uint64_t step)
    : PhaseEnsemble(std::move(phases), std::make_shared<const std::vector<double>>(std::move(frequencies)), time,
                    step) {}

PhaseEnsemble::PhaseEnsemble(std::vector<double> phases, std::shared_ptr<const std::vector<double>> frequencies,
                             double time, std::uint64_t step)
    : phases_(std::move(phases)), frequencies_(std::move(frequencies)), time_(time), step_(step) {
  if (phases_.size() != frequencies_->size())
    throw DomainError("invalid_params", "phase and frequency arrays differ in length");
  for (double& th : phases_) th = wrap_phase(th);
}

PhaseEnsemble PhaseEnsemble::advanced(std::vector<double> phases, double dt) const {
  return PhaseEnsemble(std::move(phases), frequencies_, time_ + dt, step_ + 1);
}

}  // namespace oscmfg

#include "oscmfg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "oscmfg/quadrature.hpp"

namespace oscmfg {

namespace {

constexpr double kSeedInset = 0.05;
constexpr double kGridRatio = 0.98;
constexpr double kAxisTol = 1e-6;
constexpr double kBisectRelTol = 1e-4;

const QuadratureRule& gl64() {
  static const QuadratureRule rule = gauss_legendre(64);
  return rule;
}

double interval_distance(cplx z, double u, double v) {
  double x = z.real();
  double dx = x < u ? u - x : (x > v ? x - v : 0.0);
  return std::hypot(dx, z.imag());
}

// Splits [u, v] until every panel is at least its half-length away from both poles.
void build_panels(double u, double v, const std::array<cplx, 2>& poles, int depth,
                  std::vector<std::pair<double, double>>& out) {
  const double half = 0.5 * (v - u);
  const double d0 = interval_distance(poles[0], u, v);
  const double d1 = interval_distance(poles[1], u, v);
  if (std::min(d0, d1) >= half || depth >= 80) {
    out.emplace_back(u, v);
    return;
  }
  const double x = (d0 <= d1 ? poles[0] : poles[1]).real();
  double s = 0.5 * (u + v);
  if (x > u + 0.25 * (v - u) && x < v - 0.25 * (v - u)) s = x;
  build_panels(u, s, poles, depth + 1, out);
  build_panels(s, v, poles, depth + 1, out);
}

void check_k(int k) {
  if (k == 0) throw DomainError("invalid_params", "harmonic k must be non-zero");
}

}  // namespace

double SpectrumSegment::distance(cplx z) const {
  double dy = z.imag() < imag_lo ? imag_lo - z.imag() : (z.imag() > imag_hi ? z.imag() - imag_hi : 0.0);
  return std::hypot(z.real() - real_part, dy);
}

std::array<SpectrumSegment, 2> continuous_spectrum(int k, double sigma, double gamma) {
  check_k(k);
  if (!(gamma >= 0.0)) throw DomainError("invalid_params", "gamma must be >= 0");
  const double kk = static_cast<double>(k);
  const double a = 0.5 * sigma * sigma * kk * kk;
  double y1 = -kk * (1.0 - gamma), y2 = -kk * (1.0 + gamma);
  double lo = std::min(y1, y2), hi = std::max(y1, y2);
  return {SpectrumSegment{k, a, lo, hi}, SpectrumSegment{k, -a, lo, hi}};
}

IntegralEval characteristic_integral(cplx lambda, int k, double sigma, double gamma) {
  check_k(k);
  const double kk = static_cast<double>(k);
  const double a = 0.5 * sigma * sigma * kk * kk;
  const double scale = 1.0 + std::abs(lambda);
  for (const auto& seg : continuous_spectrum(k, sigma, gamma))
    if (seg.distance(lambda) <= 1e-14 * scale)
      throw DomainError("on_continuous_spectrum", "lambda lies on the continuous spectrum");

  auto term = [&](double omega, cplx& f, cplx& df) {
    cplx x = lambda + cplx(0.0, kk * omega);
    cplx xm = x - a, xp = x + a;
    f = 1.0 / (xm * xp);
    df = -f * (1.0 / xm + 1.0 / xp);
  };

  IntegralEval out{0.0, 0.0};
  if (gamma == 0.0) {
    term(1.0, out.value, out.derivative);
    return out;
  }
  const cplx I(0.0, 1.0);
  const std::array<cplx, 2> poles{I * (lambda - a) / kk, I * (lambda + a) / kk};
  std::vector<std::pair<double, double>> panels;
  build_panels(1.0 - gamma, 1.0 + gamma, poles, 0, panels);
  const auto& rule = gl64();
  const double g = 1.0 / (2.0 * gamma);
  cplx f, df;
  for (auto [u, v] : panels) {
    const double mid = 0.5 * (u + v), half = 0.5 * (v - u);
    cplx sv = 0.0, sd = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      term(mid + half * rule.nodes[j], f, df);
      sv += rule.weights[j] * f;
      sd += rule.weights[j] * df;
    }
    out.value += half * g * sv;
    out.derivative += half * g * sd;
  }
  return out;
}

ResidualEval characteristic_residual_with_derivative(cplx lambda, double R, int k, const ModelParams& params,
                                                     const CostSpec& cost) {
  check_k(k);
  if (!(R > 0.0)) throw DomainError("invalid_params", "R must be positive");
  const double c = cost.coefficient(static_cast<std::size_t>(std::abs(k)));
  if (c == 0.0) throw DomainError("empty_discrete_spectrum", "cost coefficient of this harmonic is zero");
  const double kk = static_cast<double>(k);
  const double pref = c * kk * kk / (2.0 * R);
  IntegralEval ie = characteristic_integral(lambda, k, params.sigma, params.gamma);
  return {pref * ie.value - 1.0, pref * ie.derivative};
}

cplx characteristic_residual(cplx lambda, double R, int k, const ModelParams& params, const CostSpec& cost) {
  return characteristic_residual_with_derivative(lambda, R, k, params, cost).value;
}

std::optional<cplx> solve_characteristic(cplx seed, double R, int k, const ModelParams& params,
                                         const CostSpec& cost) {
  auto eval = [&](cplx z) -> std::optional<ResidualEval> {
    try {
      return characteristic_residual_with_derivative(z, R, k, params, cost);
    } catch (const DomainError& e) {
      if (e.kind() == "on_continuous_spectrum") return std::nullopt;
      throw;
    }
  };
  cplx z = seed;
  auto cur = eval(z);
  if (!cur) return std::nullopt;
  for (int it = 0; it < 100; ++it) {
    double fa = std::abs(cur->value);
    if (fa < 1e-14) return z;
    if (cur->derivative == 0.0) return std::nullopt;
    cplx step = cur->value / cur->derivative;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      cplx cand = z - t * step;
      auto next = eval(cand);
      if (next && std::isfinite(std::abs(next->value)) && (std::abs(next->value) < fa || fa < 1e-12)) {
        z = cand;
        cur = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (std::abs(t * step) < 1e-14 * std::max(1.0, std::abs(z))) break;
  }
  if (std::abs(cur->value) < 1e-10) return z;
  return std::nullopt;
}

cplx branch_seed(int k, const ModelParams& params, Branch branch) {
  check_k(k);
  const double kk = static_cast<double>(k);
  const double a = 0.5 * params.sigma_sq() * kk * kk;
  const double re = (1.0 - kSeedInset) * (branch == Branch::Right ? a : -a);
  return {re, -kk};
}

std::vector<double> default_R_grid(int k, const ModelParams& params, const CostSpec& cost, double floor_fraction) {
  check_k(k);
  const double c = cost.coefficient(static_cast<std::size_t>(std::abs(k)));
  if (c == 0.0) throw DomainError("empty_discrete_spectrum", "cost coefficient of this harmonic is zero");
  if (!(floor_fraction > 0.0 && floor_fraction < 1.0))
    throw DomainError("invalid_params", "floor_fraction must lie in (0, 1)");
  const double kk = static_cast<double>(k);
  // residual(seed, R) = 0 solved for R
  IntegralEval ie = characteristic_integral(branch_seed(k, params, Branch::Right), k, params.sigma, params.gamma);
  const double r0 = (c * kk * kk * ie.value / 2.0).real();
  if (!(r0 > 0.0) || !std::isfinite(r0))
    throw DomainError("no_discrete_spectrum", "no eigenvalue near the continuous-spectrum midpoint for R > 0");
  std::vector<double> grid;
  for (double R = r0; R >= floor_fraction * r0; R *= kGridRatio) grid.push_back(R);
  return grid;
}

namespace {

bool on_axis(cplx z) { return std::abs(z.real()) < kAxisTol; }

// Root at R continued from `prev`. Tries the plain seed, then seeds nudged off the
// line Im = const, since Newton started on that line cannot leave it.
std::optional<cplx> continue_root(cplx prev, double R, int k, const ModelParams& params, const CostSpec& cost,
                                  Branch branch) {
  if (auto z = solve_characteristic(prev, R, k, params, cost)) return z;
  const double sgn = branch == Branch::Right ? 1.0 : -1.0;
  for (double scale : {1.0, 0.1, 10.0}) {
    double delta = scale * std::max(std::abs(prev.real()), 1e-3);
    for (double s : {sgn, -sgn})
      if (auto z = solve_characteristic(prev + cplx(0.0, s * delta), R, k, params, cost)) return z;
  }
  return std::nullopt;
}

double refine_crossing(double R_off, cplx lambda_off, double R_on, int k, const ModelParams& params,
                       const CostSpec& cost, Branch branch) {
  while ((R_off - R_on) > kBisectRelTol * R_off) {
    double mid = 0.5 * (R_off + R_on);
    auto z = continue_root(lambda_off, mid, k, params, cost, branch);
    if (z && !on_axis(*z)) {
      R_off = mid;
      lambda_off = *z;
    } else {
      R_on = mid;
    }
  }
  return R_on;
}

}  // namespace

EigenPath discrete_eigenpath(int k, std::span<const double> R_grid, const ModelParams& params, const CostSpec& cost,
                             Branch branch) {
  check_k(k);
  for (std::size_t i = 0; i < R_grid.size(); ++i) {
    if (!(R_grid[i] > 0.0)) throw DomainError("invalid_params", "R grid values must be positive");
    if (i > 0 && !(R_grid[i] < R_grid[i - 1])) throw DomainError("invalid_params", "R grid must be decreasing");
  }
  EigenPath path;
  path.harmonic = k;
  cplx prev = branch_seed(k, params, branch);
  for (std::size_t i = 0; i < R_grid.size(); ++i) {
    const double R = R_grid[i];
    auto z = i == 0 ? solve_characteristic(prev, R, k, params, cost)
                    : continue_root(prev, R, k, params, cost, branch);
    if (!z) throw PathLostError("Newton failed to converge at R = " + std::to_string(R), path);
    double res = std::abs(characteristic_residual(*z, R, k, params, cost));
    if (!path.critical_R && !path.samples.empty() && on_axis(*z) && !on_axis(path.samples.back().lambda)) {
      const auto& last = path.samples.back();
      path.critical_R = refine_crossing(last.R, last.lambda, R, k, params, cost, branch);
    }
    path.samples.push_back({R, *z, res});
    prev = *z;
  }
  return path;
}

double critical_R_numeric(double gamma, double sigma, int k, const CostSpec& cost) {
  ModelParams p;
  p.gamma = gamma;
  p.sigma = sigma;
  auto grid = default_R_grid(k, p, cost);
  EigenPath path = discrete_eigenpath(k, grid, p, cost, Branch::Right);
  if (!path.critical_R) throw DomainError("no_collision", "eigenvalue paths do not reach the imaginary axis in the scanned range");
  return *path.critical_R;
}

double critical_R_closed(double gamma, double sigma) {
  const double s2 = sigma * sigma;
  if (gamma == 0.0) return 1.0 / (2.0 * s2 * s2);
  return std::atan(2.0 * gamma / s2) / (4.0 * s2 * gamma);
}

double critical_kappa(double gamma, double sigma) {
  const double s2 = sigma * sigma;
  if (gamma == 0.0) return s2;
  return 2.0 * gamma / std::atan(2.0 * gamma / s2);
}

std::vector<BifurcationRow> bifurcation_table(std::span<const double> gammas, double sigma) {
  std::vector<BifurcationRow> rows;
  rows.reserve(gammas.size());
  for (double g : gammas)
    rows.push_back({g, critical_R_closed(g, sigma), critical_R_numeric(g, sigma), critical_kappa(g, sigma)});
  return rows;
}

}  // namespace oscmfg

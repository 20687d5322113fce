// One line per acceptance criterion; exits nonzero if any criterion fails.
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oscmfg/fpf.hpp"
#include "oscmfg/learning.hpp"
#include "oscmfg/linearized.hpp"
#include "oscmfg/oracles.hpp"
#include "oscmfg/population.hpp"
#include "oscmfg/runner.hpp"
#include "oscmfg/simulate.hpp"
#include "oscmfg/spectral.hpp"

using namespace oscmfg;
namespace fs = std::filesystem;

namespace {

const double kSigma = std::sqrt(0.1);

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  fmt::print("[{}] criterion {}: {} ({:.2f} s of {:.0f} s){}\n", pass ? "PASS" : "FAIL", id, o.detail, secs, budget_s,
             in_time ? "" : " over budget");
  std::fflush(stdout);
}

void info(const std::string& line) { fmt::print("       info: {}\n", line); }

ModelParams spectral_params(double gamma) {
  ModelParams p;
  p.sigma = kSigma;
  p.gamma = gamma;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome critical_threshold() {
  double worst = 0.0;
  for (double g : {0.0, 0.01, 0.02, 0.05, 0.1}) {
    const double num = critical_R_numeric(g, kSigma);
    const double closed = critical_R_closed(g, kSigma);
    worst = std::max(worst, std::abs(num / closed - 1.0));
    info(fmt::format("gamma {:<5} R_c numeric {:.6f} closed {:.6f}", g, num, closed));
  }
  const double r0 = critical_R_closed(0.0, kSigma);
  return {worst < 0.01 && std::abs(r0 - 50.0) < 1e-9,
          fmt::format("max relative gap {:.2e}, R_c(0) = {:.12g}", worst, r0)};
}

Outcome eigenpath_anchor() {
  auto p = spectral_params(0.05);
  auto grid = default_R_grid(1, p, CostSpec::kuramoto());
  auto right = discrete_eigenpath(1, grid, p, CostSpec::kuramoto(), Branch::Right);
  auto left = discrete_eigenpath(1, grid, p, CostSpec::kuramoto(), Branch::Left);
  const cplx lr = right.samples.front().lambda, ll = left.samples.front().lambda;
  const double a = p.sigma_sq() / 2;
  const double dev = std::max(std::abs(lr - cplx(a, -1.0)), std::abs(ll - cplx(-a, -1.0)));
  return {dev < 1e-2, fmt::format("R = {:.4f}: lambda = {:.5f}{:+.5f}i and {:.5f}{:+.5f}i, deviation {:.2e}", grid[0],
                                  lr.real(), lr.imag(), ll.real(), ll.imag(), dev)};
}

Outcome stability_dichotomy() {
  auto p = spectral_params(0.05);
  const double rc = critical_R_closed(p.gamma, p.sigma);
  auto hi = assess_stability(2.0 * rc, p, 200.0);
  auto lo = assess_stability(0.5 * rc, p, 200.0);
  const double r_hi = hi.history.norm.back() / hi.history.norm.front();
  const double r_lo = lo.history.norm.back() / lo.history.norm.front();
  double min_lo = 1.0;
  for (double n : lo.history.norm) min_lo = std::min(min_lo, n / lo.history.norm.front());
  info(fmt::format("R_c/2 minimum ratio over [0, 200]: {:.3f}", min_lo));
  return {r_hi < 0.1 && r_lo >= 0.5,
          fmt::format("norm ratio at T = 200: {:.2e} at 2R_c ({}), {:.3f} at R_c/2 ({})", r_hi, to_string(hi.verdict),
                      r_lo, to_string(lo.verdict))};
}

Outcome phase_transition() {
  ModelParams p;
  p.sigma = kSigma;
  p.gamma = 0.05;
  p.N = 200;
  bool ok = true;
  double max_incoherent = 0.0, min_sync = 1.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    p.kappa = 0.01;
    const double g_lo = simulate_kuramoto(p, {500.0, seed, 1000, false}).mean_gamma_sq;
    p.kappa = 1.0;
    const double g_hi = simulate_kuramoto(p, {500.0, seed, 1000, false}).mean_gamma_sq;
    ok &= g_lo < 0.1 && g_hi > 0.5;
    max_incoherent = std::max(max_incoherent, g_lo);
    min_sync = std::min(min_sync, g_hi);
  }
  return {ok, fmt::format("mean Gamma^2 over 5 seeds: kappa 0.01 max {:.4f}, kappa 1 min {:.4f}", max_incoherent,
                          min_sync)};
}

Outcome learning_equilibria() {
  auto eq = equilibria(1.0, kSigma);
  const PolicyEntry expect[4] = {{5.0, 0.0}, {-5.0, kPi}, {0.0, 1.5 * kPi}, {0.0, 0.5 * kPi}};
  double point_err = 0.0;
  int attracting = 0, unstable = 0;
  for (int i = 0; i < 4; ++i) {
    point_err = std::max(point_err, policy_distance(eq[i].point, expect[i]));
    attracting += eq[i].stability == Stability::Attracting;
    unstable += eq[i].stability == Stability::Unstable;
  }
  const bool labels_ok = eq[0].stability == Stability::Attracting && eq[1].stability == Stability::Attracting;
  ModelParams p;
  p.sigma = kSigma;
  p.epsilon = 1.0;
  RandomStream rng(derive_seed(2024, "acceptance-equilibria"), 0);
  int converged = 0;
  double worst = 0.0;
  for (std::uint64_t n = 0; n < 100; ++n) {
    const PolicyEntry start{-10.0 + 20.0 * rng.uniform(2 * n), kTwoPi * rng.uniform(2 * n + 1)};
    auto end = integrate_learning_ode(start, 1.0, p, 1.0, 1000.0, 1e-2);
    const double d = std::min(policy_distance(end, eq[0].point), policy_distance(end, eq[1].point));
    worst = std::max(worst, d);
    converged += d < 1e-3;
  }
  return {point_err < 1e-12 && attracting == 2 && unstable == 2 && labels_ok && converged == 100,
          fmt::format("closed-form error {:.1e}, {} attracting / {} unstable, {}/100 converged (worst {:.1e})",
                      point_err, attracting, unstable, converged, worst)};
}

Outcome gradient_correctness() {
  RandomStream rng(derive_seed(7, "acceptance-gradient"), 0);
  ModelParams p;
  p.sigma = kSigma;
  double worst = 0.0;
  for (std::uint64_t n = 0; n < 1000; ++n) {
    const double A = -10.0 + 20.0 * rng.uniform(5 * n);
    const double z = kTwoPi * rng.uniform(5 * n + 1);
    const double omega = 0.5 + rng.uniform(5 * n + 2);
    const FirstHarmonic h{-1.0 + 2.0 * rng.uniform(5 * n + 3), -1.0 + 2.0 * rng.uniform(5 * n + 4)};
    auto g = loss_gradient(A, z, omega, p, h);
    const double hA = 1e-4 * std::max(1.0, std::abs(A)), hz = 1e-4;
    const double fa = (galerkin_loss({A + hA, z}, omega, h, p) - galerkin_loss({A - hA, z}, omega, h, p)) / (2 * hA);
    const double fz = (galerkin_loss({A, z + hz}, omega, h, p) - galerkin_loss({A, z - hz}, omega, h, p)) / (2 * hz);
    const double rel = std::hypot(g.dA - fa, g.dzeta - fz) / std::hypot(fa, fz);
    worst = std::max(worst, rel);
  }
  return {worst < 1e-5, fmt::format("max relative error {:.2e} over 1000 samples", worst)};
}

Outcome learning_experiment() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LearningExperimentConfig cfg;
    cfg.kappa = 1.0;
    auto fast = run_learning_experiment(cfg, seed, 1000);
    cfg.kappa = 0.01;
    auto slow = run_learning_experiment(cfg, seed, 1000);
    const bool entered = fast.first_entry && slow.first_entry;
    ok &= entered && *fast.first_entry < *slow.first_entry;
    detail += fmt::format("{}seed {}: {} vs {}", seed == 1 ? "" : "; ", seed,
                          fast.first_entry ? fmt::format("{:.1f}", *fast.first_entry) : "never",
                          slow.first_entry ? fmt::format("{:.1f}", *slow.first_entry) : "never");
  }
  return {ok, "first entry kappa 1 vs kappa 0.01, " + detail};
}

Outcome gain_oracle() {
  double worst = 0.0;
  for (std::uint64_t d = 0; d < 10; ++d) {
    RandomStream coef(derive_seed(d, "acceptance-density"), 0);
    double a[3], b[3];
    for (int k = 0; k < 3; ++k) {
      a[k] = -0.6 + 1.2 * coef.uniform(2 * k) / (k + 1);
      b[k] = -0.6 + 1.2 * coef.uniform(2 * k + 1) / (k + 1);
    }
    auto density = GridDensity::from_function(512, [&](double t) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[k] * std::cos((k + 1) * t) + b[k] * std::sin((k + 1) * t);
      return std::exp(s);
    });
    std::vector<double> h(512);
    for (std::size_t j = 0; j < 512; ++j) h[j] = std::cos(density.theta(j));
    auto exact = poisson_gain_grid(density, h);
    auto [k1, k2] = gain_first_harmonic(density, exact.K);
    ParticleCloud cloud;
    cloud.phases = sample_from_density(density, 10000, RandomStream(derive_seed(d, "acceptance-particles"), 0), true);
    cloud.frequencies.assign(cloud.phases.size(), 1.0);
    auto g = galerkin_gain(cloud, ObservationFunction{});
    worst = std::max(worst, std::hypot(g.kappa1 - k1, g.kappa2 - k2) / std::hypot(k1, k2));
  }
  ParticleCloud uniform;
  uniform.phases = sample_from_density(GridDensity::uniform(512), 10000, RandomStream(1, 0), true);
  uniform.frequencies.assign(uniform.phases.size(), 1.0);
  auto gu = galerkin_gain(uniform, ObservationFunction{});
  double sup = 0.0;
  for (int j = 0; j < 720; ++j) {
    const double t = kTwoPi * j / 720.0;
    sup = std::max(sup, std::abs(gu.gain(t) + std::sin(t)));
  }
  return {worst < 0.05 && sup < 1e-3,
          fmt::format("max relative coefficient gap {:.2e} over 10 densities, uniform case sup|K + sin| {:.1e}", worst,
                      sup)};
}

Outcome fpf_tracking() {
  FilterConfig defaults;
  double worst_rmse = 0.0;
  std::string rmses;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double r = run_fpf_experiment(defaults, seed, 100).rmse;
    worst_rmse = std::max(worst_rmse, r);
    rmses += fmt::format("{}{:.3f}", seed == 1 ? "" : ", ", r);
  }
  FilterConfig matched = OracleSection::matched_filter();
  auto exact = compare_fpf_with_ks(matched, 1, GainSource::Exact, 512, 32);
  auto galerkin = compare_fpf_with_ks(matched, 1, GainSource::Galerkin, 512, 32);
  info(fmt::format("matched case with the Galerkin gain: mean TV {:.3f}", galerkin.mean_tv));
  double tv_n = 0.0, tv_2n = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FilterConfig c = matched;
    tv_n += compare_fpf_with_ks(c, seed, GainSource::Exact, 512, 32).mean_tv / 5.0;
    c.N *= 2;
    tv_2n += compare_fpf_with_ks(c, seed, GainSource::Exact, 512, 32).mean_tv / 5.0;
  }
  info(fmt::format("mean TV over 5 seeds: N = {} {:.4f}, N = {} {:.4f}", matched.N, tv_n, 2 * matched.N, tv_2n));
  return {worst_rmse < 0.3 && exact.mean_tv < 0.15,
          fmt::format("default tracking RMSE [{}] rad (target < 0.3), matched exact-gain mean TV {:.3f} (target < 0.15)",
                      rmses, exact.mean_tv)};
}

Outcome determinism_suite() {
  int broken = 0;
  const fs::path root = fs::temp_directory_path() / "oscmfg_acceptance";
  for (auto s : {Subcommand::Simulate, Subcommand::Spectrum, Subcommand::Bifurcation, Subcommand::Learn,
                 Subcommand::Fpf, Subcommand::OracleCompare}) {
    ExperimentConfig c;
    c.subcommand = s;
    c.seed = 11;
    c.simulate.T = 5.0;
    c.spectrum.ivp_R = 80.0;
    c.spectrum.ivp_T = 20.0;
    c.bifurcation.gamma_count = 3;
    c.learn.experiment.T = 20.0;
    c.fpf.filter.T = 5.0;
    c.oracle.filter.T = 2.0;
    std::vector<RunResult> runs;
    for (const char* tag : {"a", "b"}) {
      c.out = (root / (std::string(to_string(s)) + tag)).string();
      fs::remove_all(c.out);
      runs.push_back(run(c));
    }
    for (const auto& f : runs[0].artifacts)
      if (f != "manifest.txt" && slurp(runs[0].out_dir / f) != slurp(runs[1].out_dir / f)) ++broken;
  }
  fs::remove_all(root);

  int violations = 0;
  RandomStream rng(99, 0);
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    std::vector<double> ph(25);
    for (std::size_t i = 0; i < ph.size(); ++i) ph[i] = kTwoPi * rng.uniform(trial * 64 + i);
    const double phi = kTwoPi * rng.uniform(trial * 64 + 40);
    std::vector<double> rot(ph.size());
    for (std::size_t i = 0; i < ph.size(); ++i) rot[i] = wrap_phase(ph[i] + phi);
    violations += std::abs(order_parameter_sq(ph) - order_parameter_sq(rot)) > 1e-12;
    PhaseEnsemble a(ph, std::vector<double>(ph.size(), 1.0)), b(rot, std::vector<double>(ph.size(), 1.0));
    const PolicyEntry pol{3.0 * rng.uniform(trial * 64 + 41), kTwoPi * rng.uniform(trial * 64 + 42)};
    for (std::size_t i = 0; i < ph.size(); ++i) {
      violations += std::abs(kuramoto_control(i, a, 0.7) - kuramoto_control(i, b, 0.7)) > 1e-12;
      violations += std::abs(parameterized_control(i, a, pol, 1.3) - parameterized_control(i, b, pol, 1.3)) > 1e-12;
    }
    const double x = -1e4 + 2e4 * rng.uniform(trial * 64 + 43);
    const double w = wrap_phase(x);
    violations += !(w >= 0.0 && w < kTwoPi && wrap_phase(w) == w);
  }
  return {broken == 0 && violations == 0,
          fmt::format("{} differing artifacts across 6 subcommands, {} invariance violations", broken, violations)};
}

}  // namespace

int main() {
  criterion(1, 30, critical_threshold);
  criterion(2, 10, eigenpath_anchor);
  criterion(3, 60, stability_dichotomy);
  criterion(4, 120, phase_transition);
  criterion(5, 30, learning_equilibria);
  criterion(6, 30, gradient_correctness);
  criterion(7, 300, learning_experiment);
  criterion(8, 60, gain_oracle);
  criterion(9, 120, fpf_tracking);
  criterion(10, 60, determinism_suite);
  fmt::print("{} of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

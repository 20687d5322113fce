#include <gtest/gtest.h>

#include <cmath>

#include "oscmfg/error.hpp"
#include "oscmfg/population.hpp"
#include "oscmfg/simulate.hpp"

using namespace oscmfg;

namespace {

PhaseEnsemble ensemble_of(std::vector<double> phases, double omega = 1.0) {
  std::vector<double> freqs(phases.size(), omega);
  return PhaseEnsemble(std::move(phases), std::move(freqs));
}

std::vector<double> random_phases(std::size_t n, std::uint64_t seed) {
  RandomStream r(seed, 0);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = kTwoPi * r.uniform(i);
  return out;
}

}  // namespace

TEST(SampleFrequencies, DegenerateInterval) {
  auto f = sample_frequencies(0.0, 5, RandomStream(123, 0));
  ASSERT_EQ(f.size(), 5u);
  for (double w : f) EXPECT_EQ(w, 1.0);
}

TEST(SampleFrequencies, MeanWithinMomentBound) {
  const double gamma = 0.1;
  const std::size_t n = 10000;
  auto f = sample_frequencies(gamma, n, RandomStream(9, 0));
  double mean = 0.0;
  for (double w : f) {
    EXPECT_GE(w, 1.0 - gamma);
    EXPECT_LE(w, 1.0 + gamma);
    mean += w;
  }
  mean /= static_cast<double>(n);
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * (2.0 * gamma / std::sqrt(12.0)) / std::sqrt(double(n)));
}

TEST(SampleFrequencies, Deterministic) {
  EXPECT_EQ(sample_frequencies(0.05, 3, RandomStream(77, 0)), sample_frequencies(0.05, 3, RandomStream(77, 0)));
}

TEST(WrapPhase, Examples) {
  EXPECT_EQ(wrap_phase(0.0), 0.0);
  EXPECT_EQ(wrap_phase(kTwoPi), 0.0);
  EXPECT_NEAR(wrap_phase(6.3), 6.3 - kTwoPi, 1e-15);
  EXPECT_NEAR(wrap_phase(6.3), 0.016814692820414, 1e-12);
  EXPECT_NEAR(wrap_phase(-0.5), kTwoPi - 0.5, 1e-15);
}

TEST(WrapPhase, IdempotentAndInRange) {
  for (double x : {-100.0, -kTwoPi, -1e-17, 0.0, 3.0, kTwoPi - 1e-16, 1e6, 123.456}) {
    const double w = wrap_phase(x);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, kTwoPi);
    EXPECT_EQ(wrap_phase(w), w);
  }
}

TEST(WrapPhase, RejectsNonFinite) {
  EXPECT_THROW(wrap_phase(std::nan("")), DomainError);
  EXPECT_THROW(wrap_phase(INFINITY), DomainError);
}

TEST(KuramotoControl, Examples) {
  EXPECT_EQ(kuramoto_control(0, ensemble_of({1.0, 1.0, 1.0}), 1.0), 0.0);
  EXPECT_NEAR(kuramoto_control(0, ensemble_of({0.0, kPi / 2}), 1.0), 0.5, 1e-15);
  auto spread = ensemble_of({0.0, kPi / 2, kPi, 3 * kPi / 2});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(kuramoto_control(i, spread, 1.0), 0.0, 1e-15);
}

TEST(ParameterizedControl, Examples) {
  auto ens = ensemble_of(random_phases(7, 4));
  EXPECT_EQ(parameterized_control(2, ens, {0.0, 0.3}, 1.0), 0.0);
  const double kappa = 0.7, R = 2.0;
  for (std::size_t i = 0; i < ens.size(); ++i)
    EXPECT_NEAR(parameterized_control(i, ens, {kappa * R, 0.0}, R), kuramoto_control(i, ens, kappa), 1e-14);
  EXPECT_NEAR(parameterized_control(0, ensemble_of({0.0, 0.0}), {1.0, kPi / 2}, 1.0), 1.0, 1e-15);
}

TEST(Controls, RotationInvariantAndRelabelEquivariant) {
  auto phases = random_phases(9, 5);
  auto ens = ensemble_of(phases);
  std::vector<double> rotated, reversed(phases.rbegin(), phases.rend());
  for (double p : phases) rotated.push_back(wrap_phase(p + 1.234));
  auto rot = ensemble_of(rotated);
  auto rev = ensemble_of(reversed);
  const PolicyEntry pol{1.7, 0.4};
  for (std::size_t i = 0; i < phases.size(); ++i) {
    EXPECT_NEAR(kuramoto_control(i, rot, 1.0), kuramoto_control(i, ens, 1.0), 1e-13);
    EXPECT_NEAR(parameterized_control(i, rot, pol, 1.0), parameterized_control(i, ens, pol, 1.0), 1e-13);
    EXPECT_NEAR(kuramoto_control(phases.size() - 1 - i, rev, 1.0), kuramoto_control(i, ens, 1.0), 1e-13);
  }
  auto batch = kuramoto_controls(ens, 1.0);
  for (std::size_t i = 0; i < phases.size(); ++i) EXPECT_NEAR(batch[i], kuramoto_control(i, ens, 1.0), 1e-14);
}

TEST(EmStep, DeterministicDrift) {
  ModelParams p;
  p.sigma = 0.0;
  p.dt = 0.1;
  const std::vector<double> u{0.0};
  auto next = em_step(ensemble_of({0.0}), u, p, NoiseSource{1});
  EXPECT_NEAR(next.phases()[0], 0.1, 1e-15);
  EXPECT_EQ(next.step(), 1u);
  EXPECT_NEAR(next.time(), 0.1, 1e-15);
  auto wrapped = em_step(ensemble_of({6.2}), u, p, NoiseSource{1});
  EXPECT_NEAR(wrapped.phases()[0], 0.016814692820414, 1e-12);
}

TEST(EmStep, ZeroNoiseKeepsDifferences) {
  ModelParams p;
  p.sigma = 0.0;
  auto ens = ensemble_of({0.3, 2.0, 4.5});
  const std::vector<double> u(3, 0.0);
  for (int n = 0; n < 100000; ++n) ens = em_step(ens, u, p, NoiseSource{1});
  EXPECT_NEAR(angle_difference(ens.phases()[1], ens.phases()[0]), 1.7, 1e-9);
  EXPECT_NEAR(angle_difference(ens.phases()[2], ens.phases()[0]), 4.2 - kTwoPi, 1e-9);
}

TEST(OrderParameter, Examples) {
  const std::vector<double> same{2.0, 2.0, 2.0}, anti{0.0, kPi}, quarter{0.0, kPi / 2};
  EXPECT_NEAR(order_parameter_sq(same), 1.0, 1e-15);
  EXPECT_NEAR(order_parameter_sq(anti), 0.0, 1e-15);
  EXPECT_NEAR(order_parameter_sq(quarter), 0.5, 1e-15);
}

TEST(OrderParameter, BoundedAndRotationInvariant) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto ph = random_phases(13, s);
    const double g = order_parameter_sq(ph);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
    for (double& p : ph) p = wrap_phase(p + 0.77 * double(s));
    EXPECT_NEAR(order_parameter_sq(ph), g, 1e-14);
  }
}

TEST(CircularMean, Examples) {
  const std::vector<double> a{kPi / 2, kPi / 2}, b{0.0, kPi / 2}, c{0.0, kPi};
  EXPECT_NEAR(circular_mean(a), kPi / 2, 1e-15);
  EXPECT_NEAR(circular_mean(b), kPi / 4, 1e-15);
  EXPECT_THROW(circular_mean(c), DomainError);
}

TEST(EmpiricalCost, Examples) {
  std::vector<PhaseSnapshot> traj{{0.0, {1.0, 1.0}}, {0.1, {1.0, 1.0}}, {0.2, {1.0, 1.0}}};
  std::vector<std::vector<double>> zero(3, std::vector<double>(2, 0.0));
  auto c = empirical_cost(traj, zero, 1.0, CostSpec::kuramoto());
  for (double v : c.total) EXPECT_NEAR(v, 0.0, 1e-15);

  std::vector<std::vector<double>> u{{0.3, -0.2}, {0.1, 0.5}, {0.0, 0.0}};
  auto c1 = empirical_cost(traj, u, 1.0, CostSpec::kuramoto());
  auto c2 = empirical_cost(traj, u, 2.0, CostSpec::kuramoto());
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(c2.control[i], 2.0 * c1.control[i]);
}

TEST(EmpiricalCost, UncontrolledLongRun) {
  ModelParams p;
  p.kappa = 0.0;
  p.N = 20;
  p.gamma = 0.05;
  auto sim = simulate_kuramoto(p, {2000.0, 3, 10, true});
  std::vector<PhaseSnapshot> traj;
  std::vector<std::vector<double>> controls;
  for (const auto& r : sim.records) {
    traj.push_back({r.t, r.phases});
    controls.push_back(r.controls);
  }
  auto c = empirical_cost(traj, controls, 1.0, CostSpec::kuramoto());
  double mean = 0.0;
  for (std::size_t i = 0; i < p.N; ++i) {
    EXPECT_EQ(c.control[i], 0.0);
    mean += c.state[i];
  }
  EXPECT_NEAR(mean / double(p.N), (double(p.N) - 1.0) / double(p.N) * 0.25, 0.01);
}

TEST(Simulate, BitwiseReproducible) {
  ModelParams p;
  p.N = 30;
  auto a = simulate_kuramoto(p, {5.0, 17, 7, true});
  auto b = simulate_kuramoto(p, {5.0, 17, 7, true});
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].phases, b.records[k].phases);
  EXPECT_EQ(a.mean_gamma_sq, b.mean_gamma_sq);
  EXPECT_EQ(a.records.back().t, 5.0);
}

TEST(ModelParams, Validation) {
  ModelParams p;
  p.kappa = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  EXPECT_NO_THROW(p.validate());
}

#include <gtest/gtest.h>

#include <cmath>

#include "oscmfg/error.hpp"
#include "oscmfg/learning.hpp"
#include "oscmfg/population.hpp"
#include "oscmfg/random.hpp"

using namespace oscmfg;

namespace {

ModelParams learn_params(double sigma_sq = 0.1, double epsilon = 1.0) {
  ModelParams p;
  p.sigma = std::sqrt(sigma_sq);
  p.epsilon = epsilon;
  p.R = 1.0;
  return p;
}

}  // namespace

TEST(MeanFieldCost, Examples) {
  for (double th : {0.0, 1.0, 4.0}) EXPECT_NEAR(mean_field_cost_bar(th, {0.0, 0.0}), 0.25, 1e-15);
  EXPECT_NEAR(mean_field_cost_bar(0.0, {1.0, 0.0}), 0.0, 1e-15);
  EXPECT_THROW(mean_field_cost_bar(0.0, {0.0, 0.0}, CostSpec({0.0, 0.0, 1.0})), DomainError);
}

TEST(FirstHarmonic, OfPhases) {
  const std::vector<double> ph{0.0, kPi / 2};
  auto h = FirstHarmonic::of(ph);
  EXPECT_NEAR(h.Pc, 0.5, 1e-15);
  EXPECT_NEAR(h.Ps, 0.5, 1e-15);
  EXPECT_NEAR(h.magnitude_sq(), order_parameter_sq(ph), 1e-15);
}

TEST(GalerkinClosed, UnitFrequency) {
  auto a = galerkin_params_closed(1.0, std::sqrt(0.1));
  EXPECT_NEAR(a.A, 5.0, 1e-12);
  EXPECT_NEAR(a.zeta, 0.0, 1e-12);
}

TEST(GalerkinClosed, ZeroesGradient) {
  const FirstHarmonic h{0.6, -0.3};
  for (double omega : {0.9, 1.0, 1.1, 1.7}) {
    auto a = galerkin_params_closed(omega, std::sqrt(0.1));
    auto g = loss_gradient(a.A, a.zeta, omega, learn_params(), h);
    EXPECT_LT(std::abs(g.dA), 1e-10);
    EXPECT_LT(std::abs(g.dzeta), 1e-10);
    EXPECT_GE(a.A, 0.0);
  }
}

TEST(GalerkinClosed, BothBranchesGiveSameControl) {
  const double omega = 1.1;
  auto a = galerkin_params_closed(omega, 0.1);
  const PolicyEntry b{-a.A, a.zeta - kPi};
  RandomStream rng(8, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> ph(12);
    for (std::size_t i = 0; i < ph.size(); ++i) ph[i] = kTwoPi * rng.uniform(std::uint64_t(trial * 100) + i);
    PhaseEnsemble ens(ph, std::vector<double>(ph.size(), 1.0));
    for (std::size_t i = 0; i < ph.size(); ++i)
      EXPECT_NEAR(parameterized_control(i, ens, a, 1.0), parameterized_control(i, ens, b, 1.0), 1e-12);
  }
}

TEST(BellmanError, ZeroPolicyUniformDensity) {
  auto grid = uniform_theta_grid(64);
  auto e = bellman_error(grid, {0.0, 0.0}, 1.0, {0.0, 0.0}, learn_params());
  for (double v : e.values) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_NEAR(e.eta, 0.25, 1e-15);
}

TEST(BellmanError, CenteredAndOrthogonalAtOptimum) {
  auto grid = uniform_theta_grid(256);
  const FirstHarmonic h{0.4, 0.7};
  auto e = bellman_error(grid, {3.3, 1.2}, 1.05, h, learn_params());
  double mean = 0.0;
  for (double v : e.values) mean += v;
  EXPECT_LT(std::abs(mean / 256.0), 1e-12);

  const double omega = 1.07;
  auto opt = galerkin_params_closed(omega, std::sqrt(0.1));
  auto L = bellman_error(grid, opt, omega, h, learn_params()).values;
  auto [pc, ps] = galerkin_projections(L);
  EXPECT_LT(std::abs(pc), 1e-8);
  EXPECT_LT(std::abs(ps), 1e-8);
}

TEST(BellmanError, EmptyGridRejected) {
  EXPECT_THROW(bellman_error({}, {1.0, 0.0}, 1.0, {0.1, 0.0}, learn_params()), DomainError);
}

TEST(GalerkinProjections, Examples) {
  auto grid = uniform_theta_grid(256);
  std::vector<double> zero(256, 0.0), c(256), s2(256);
  for (std::size_t m = 0; m < 256; ++m) {
    c[m] = std::cos(grid[m]);
    s2[m] = std::sin(2.0 * grid[m]);
  }
  auto z = galerkin_projections(zero);
  EXPECT_EQ(z.first, 0.0);
  EXPECT_EQ(z.second, 0.0);
  auto pc = galerkin_projections(c);
  EXPECT_NEAR(pc.first, kPi, 1e-10);
  EXPECT_NEAR(pc.second, 0.0, 1e-10);
  auto ps = galerkin_projections(s2);
  EXPECT_NEAR(ps.first, 0.0, 1e-10);
  EXPECT_NEAR(ps.second, 0.0, 1e-10);
  std::vector<double> tiny(8, 1.0);
  EXPECT_THROW(galerkin_projections(tiny), DomainError);
}

TEST(LossGradient, VanishesWithoutHarmonic) {
  for (double A : {-2.0, 0.0, 3.0})
    for (double z : {0.0, 1.0, 5.0}) {
      auto g = loss_gradient(A, z, 1.1, learn_params(), {0.0, 0.0});
      EXPECT_EQ(g.dA, 0.0);
      EXPECT_EQ(g.dzeta, 0.0);
    }
}

TEST(LossGradient, MatchesFiniteDifferences) {
  RandomStream rng(31, 0);
  for (std::uint64_t n = 0; n < 50; ++n) {
    const double A = -8.0 + 16.0 * rng.uniform(5 * n);
    const double z = kTwoPi * rng.uniform(5 * n + 1);
    const double omega = 0.8 + 0.4 * rng.uniform(5 * n + 2);
    const FirstHarmonic h{-1.0 + 2.0 * rng.uniform(5 * n + 3), -1.0 + 2.0 * rng.uniform(5 * n + 4)};
    const auto p = learn_params();
    auto g = loss_gradient(A, z, omega, p, h);
    const double dh = 1e-5;
    const double fa = (galerkin_loss({A + dh, z}, omega, h, p) - galerkin_loss({A - dh, z}, omega, h, p)) / (2 * dh);
    const double fz = (galerkin_loss({A, z + dh}, omega, h, p) - galerkin_loss({A, z - dh}, omega, h, p)) / (2 * dh);
    EXPECT_NEAR(g.dA, fa, 1e-5 * std::max(1.0, std::abs(fa)));
    EXPECT_NEAR(g.dzeta, fz, 1e-5 * std::max(1.0, std::abs(fz)));
  }
}

TEST(LearningOde, FrozenAtZeroOrderParameter) {
  LearningState s{{{1.3, 0.4}, {-2.0, 5.0}}, 0.0};
  const std::vector<double> om{1.0, 1.1};
  auto next = learning_ode_step(s, 0.0, om, learn_params(), 0.01);
  EXPECT_EQ(next.policy[0].A, 1.3);
  EXPECT_EQ(next.policy[1].zeta, 5.0);
}

TEST(LearningOde, EquilibriumIsFixed) {
  auto a = galerkin_params_closed(1.0, std::sqrt(0.1));
  LearningState s{{a}, 0.0};
  const std::vector<double> om{1.0};
  auto next = learning_ode_step(s, 0.7, om, learn_params(), 0.01);
  EXPECT_NEAR(next.policy[0].A, a.A, 1e-14);
  EXPECT_NEAR(next.policy[0].zeta, a.zeta, 1e-14);
}

TEST(LearningOde, FirstStepFromOrigin) {
  const double dt = 0.01;
  LearningState s{{{0.0, 0.0}}, 0.0};
  const std::vector<double> om{1.0};
  auto next = learning_ode_step(s, 1.0, om, learn_params(), dt);
  EXPECT_NEAR(next.policy[0].A, 0.05 * dt, 1e-15);
  EXPECT_EQ(next.policy[0].zeta, 0.0);
}

TEST(LearningOde, ZetaFrozenOnAxis) {
  for (double z : {0.0, 1.0, 4.0}) EXPECT_EQ(learning_rhs({0.0, z}, 1.1, learn_params(), 0.5).dzeta, 0.0);
}

TEST(LearningOde, EnergyDescends) {
  const auto p = learn_params();
  const double omega = 1.1, g2 = 0.8;
  const FirstHarmonic h{std::sqrt(g2), 0.0};
  PolicyEntry a{-3.0, 2.0};
  double E = galerkin_loss(a, omega, h, p);
  for (int n = 0; n < 2000; ++n) {
    auto r = learning_rhs(a, omega, p, g2);
    a.A += 1e-3 * r.dA;
    a.zeta += 1e-3 * r.dzeta;
    const double next = galerkin_loss(a, omega, h, p);
    EXPECT_LE(next, E + 1e-12);
    E = next;
  }
}

TEST(LearningOde, RateScalingRescalesTimeOnly) {
  auto p1 = learn_params(0.1, 1.0);
  auto p2 = learn_params(0.1, 4.0);
  auto a = integrate_learning_ode({0.5, 2.0}, 1.05, p1, 0.8, 5.0, 1e-3);
  auto b = integrate_learning_ode({0.5, 2.0}, 1.05, p2, 0.2, 5.0, 1e-3);
  EXPECT_NEAR(a.A, b.A, 1e-12);
  EXPECT_NEAR(a.zeta, b.zeta, 1e-12);
}

TEST(Equilibria, ClosedFormsAndClassification) {
  auto eq = equilibria(1.0, std::sqrt(0.1));
  EXPECT_NEAR(eq[0].point.A, 5.0, 1e-12);
  EXPECT_NEAR(eq[0].point.zeta, 0.0, 1e-12);
  EXPECT_NEAR(eq[1].point.A, -5.0, 1e-12);
  EXPECT_NEAR(eq[1].point.zeta, kPi, 1e-12);
  EXPECT_NEAR(eq[2].point.A, 0.0, 1e-15);
  EXPECT_NEAR(eq[2].point.zeta, 3 * kPi / 2, 1e-12);
  EXPECT_NEAR(eq[3].point.A, 0.0, 1e-15);
  EXPECT_NEAR(eq[3].point.zeta, kPi / 2, 1e-12);
  EXPECT_EQ(eq[0].stability, Stability::Attracting);
  EXPECT_EQ(eq[1].stability, Stability::Attracting);
  EXPECT_EQ(eq[2].stability, Stability::Unstable);
  EXPECT_EQ(eq[3].stability, Stability::Unstable);
  EXPECT_GT(std::max(eq[2].eigenvalues[0], eq[2].eigenvalues[1]), 0.0);
}

TEST(Neighborhood, BothBranches) {
  const PolicyEntry t{5.0, 0.1};
  EXPECT_TRUE(in_neighborhood({5.2, 0.1 + 0.1}, t));
  EXPECT_TRUE(in_neighborhood({-5.1, 0.1 - kPi + kTwoPi}, t));
  EXPECT_FALSE(in_neighborhood({5.3, 0.1}, t));
  EXPECT_FALSE(in_neighborhood({5.0, 0.4}, t));
  EXPECT_NEAR(policy_distance({1.0, 0.1}, {1.0, kTwoPi - 0.1}), 0.2, 1e-12);
}

TEST(LearningExperiment, FrozenWhenRateIsZero) {
  LearningExperimentConfig cfg;
  cfg.N = 20;
  cfg.T = 5.0;
  cfg.epsilon = 0.0;
  cfg.A0 = 1.5;
  cfg.zeta0 = 0.3;
  auto run = run_learning_experiment(cfg, 4, 10);
  for (const auto& s : run.samples) {
    EXPECT_EQ(s.A, 1.5);
    EXPECT_EQ(s.zeta, 0.3);
  }
  EXPECT_EQ(run.samples.back().t, 5.0);
}

TEST(LearningExperiment, Deterministic) {
  LearningExperimentConfig cfg;
  cfg.N = 20;
  cfg.T = 10.0;
  auto a = run_learning_experiment(cfg, 9, 50);
  auto b = run_learning_experiment(cfg, 9, 50);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].A, b.samples[i].A);
    EXPECT_EQ(a.samples[i].gamma_sq, b.samples[i].gamma_sq);
  }
}

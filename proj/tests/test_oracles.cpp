#include <gtest/gtest.h>

#include <cmath>

#include "popnet/oracles.hpp"

using namespace popnet;
using namespace popnet::oracles;

TEST(SteadyState, ReferenceValues) {
  ContactParams p{1.0, 0.1, 200.0, 0.0, 0.1, 0.1};
  const auto s = predict_log_contact_steady_state(p, 0.0, 0.0);
  EXPECT_NEAR(s.var_log_c, 0.1, 1e-15);
  EXPECT_NEAR(s.mean_log_c, std::log(200.0) - 0.1, 1e-14);
}

TEST(SteadyState, DeterministicLimit) {
  ContactParams p{1.0, 0.3, 120.0, 0.0, 0.1, 0.0};
  const auto s = predict_log_contact_steady_state(p, 0.4, 0.4);
  EXPECT_NEAR(s.mean_log_c, std::log(120.0), 1e-14);
  EXPECT_EQ(s.var_log_c, 0.0);
}

TEST(SteadyState, ControlRaisesTheMean) {
  ContactParams p{1.0, 0.2, 200.0, 0.0, 0.1, 0.1};
  EXPECT_GT(predict_log_contact_steady_state(p, 0.1, 0.3).mean_log_c,
            predict_log_contact_steady_state(p, 0.1, 0.1).mean_log_c);
}

TEST(SteadyState, NeedsMeanReversion) {
  ContactParams p;
  p.mu = 0.0;
  EXPECT_THROW(predict_log_contact_steady_state(p, 0, 0), std::domain_error);
}

// Independent Euler-Maruyama chains of the log-OU equation the prediction is
// derived from.
TEST(SteadyState, MatchesDirectOuRecursion) {
  ContactParams p{1.0, 0.2, 50.0, 0.0, 0.1, 0.15};
  const double phi = 0.05, kappa = 0.02, dt = 1e-2;
  const auto pred = predict_log_contact_steady_state(p, phi, kappa);
  const int chains = 20000, steps = 10000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < chains; ++i) {
    CounterStream rng(12, 0, std::uint32_t(i));
    double y = std::log(p.c_bar);
    for (int k = 0; k < steps; ++k)
      y += -(0.5 * p.mu * (y - std::log(p.c_bar)) + p.beta * (phi - kappa) + 0.5 * p.nu * p.nu) * dt +
           p.nu * std::sqrt(dt) * rng.normal();
    s1 += y;
    s2 += y * y;
  }
  const double mean = s1 / chains, var = s2 / chains - mean * mean;
  EXPECT_NEAR(mean, pred.mean_log_c, 0.01);
  EXPECT_NEAR(var, pred.var_log_c, 0.03 * pred.var_log_c);
}

TEST(BruteForceContact, ZeroLambda) {
  ContactControlParams cc;
  cc.lambda = 0.0;
  ContactCostState s;
  const auto grid = uniform_grid(0.0, 1.0, 201);
  EXPECT_EQ(brute_force_contact_cost(s, grid, {}, cc, 1000), 0.0);
}

TEST(BruteForceContact, SaturatedGatesGiveOne) {
  ContactControlParams cc;
  cc.alpha_r = cc.alpha_h = 1000.0;
  ContactParams cp;
  ContactCostState s;
  s.c = 1.0;
  s.rho = 1.0;
  const auto grid = uniform_grid(0.0, 2.0, 201);
  const double k = brute_force_contact_cost(s, grid, cp, cc, 100000);
  EXPECT_LE(std::abs(k - contact_control(s.c, s.rho, cc, cp)), 0.01);
  EXPECT_LE(std::abs(k - 1.0), 0.01);
}

TEST(BruteForceContact, LargePenaltyPushesToZero) {
  ContactControlParams cc;
  cc.gamma_c = 1e6;
  ContactCostState s;
  const auto grid = uniform_grid(0.0, 1.0, 201);
  EXPECT_EQ(brute_force_contact_cost(s, grid, {}, cc, 1000), 0.0);
}

TEST(BruteForceOpinion, ClosedGateGivesZero) {
  OpinionControlParams oc;
  oc.rv = {Activation::Kind::constant, 0.0};
  OpinionCostState s;
  const auto grid = uniform_grid(-1.0, 1.0, 201);
  EXPECT_EQ(brute_force_opinion_cost(s, grid, oc, {}, 1000), 0.0);
}

TEST(BruteForceOpinion, AtTargetWithoutCompromise) {
  OpinionControlParams oc;
  OpinionParams op;
  op.delta = 0.1;
  OpinionCostState s;
  s.v = oc.v_target;
  s.v_star = -0.8;
  const auto grid = uniform_grid(-0.25, 0.25, 201);
  EXPECT_LE(std::abs(brute_force_opinion_cost(s, grid, oc, op, 100000)), 0.0025);
}

TEST(BruteForceOpinion, TableOneState) {
  OpinionControlParams oc;  // gamma_v = 10, v_target = 0.5
  OpinionParams op;         // alpha = 1
  op.delta = 0.1;
  OpinionCostState s;
  s.v = 0.0;
  s.v_star = 0.9;
  s.epsilon = 1e-3;
  const auto grid = uniform_grid(-0.25, 0.25, 201);
  const double closed = opinion_control_full(s.v, s.v_star, s.c, s.c_star, s.rho, s.epsilon, oc, op);
  EXPECT_LE(std::abs(brute_force_opinion_cost(s, grid, oc, op, 100000) - closed), 0.0025);
}

TEST(BruteForceRho, Examples) {
  Ensemble e;
  e.resize(4);
  e.v = {-0.9, 0.0, 0.1, 0.9};
  EXPECT_EQ(brute_force_rho(e, 0.2), (std::vector<double>{0.25, 0.5, 0.5, 0.25}));
  e.v = {0.2, 0.2, 0.2, 0.2};
  EXPECT_EQ(brute_force_rho(e, 0.01), (std::vector<double>{1, 1, 1, 1}));
  e.resize(1);
  EXPECT_EQ(brute_force_rho(e, 0.01), std::vector<double>{1.0});
}

TEST(Scaling, ZeroMuGivesZeroPsiErrors) {
  ContactParams cp;
  cp.mu = 0.0;
  const auto rep = scaling_consistency_report(uniform_grid(0.1, 10, 50), {0.1, 0.05, 0.01}, cp, {}, {}, {});
  for (const auto& row : rep.rows) EXPECT_EQ(row.psi_error, 0.0);
}

TEST(Scaling, UnitRatioRowIsExact) {
  ContactParams cp;
  cp.mu = 0.4;
  const auto rep = scaling_consistency_report({1.0}, {0.1, 0.01, 0.001}, cp, {}, {}, {});
  for (const auto& row : rep.rows) EXPECT_EQ(row.psi_error, 0.0);
}

TEST(Scaling, HalvingEpsilonHalvesErrors) {
  ContactParams cp;
  cp.mu = 0.1;
  std::vector<ControlState> states{{0.0, 0.4, 100, 150, 0.5}, {-0.8, -0.5, 60, 20, 0.5}};
  OpinionParams op;
  op.delta = 2.0;
  const auto rep = scaling_consistency_report(uniform_grid(0.1, 10, 100), {0.02, 0.01, 0.005, 0.0025}, cp, states,
                                              {}, op);
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const double rp = rep.rows[k - 1].psi_error / rep.rows[k].psi_error;
    const double rc = rep.rows[k - 1].control_error / rep.rows[k].control_error;
    EXPECT_GE(rp, 1.6);
    EXPECT_LE(rp, 2.4);
    EXPECT_GE(rc, 1.6);
    EXPECT_LE(rc, 2.4);
  }
  for (double q : rep.psi_orders) EXPECT_NEAR(q, 1.0, 0.1);
}

TEST(Scaling, RejectsIncreasingEpsilons) {
  EXPECT_THROW(scaling_consistency_report({1.0}, {0.01, 0.1}, {}, {}, {}, {}), std::invalid_argument);
}

TEST(Suites, ScalingPasses) {
  EXPECT_TRUE(check_scaling().passed) << check_scaling().detail;
  ScalingSetup zero;
  zero.mu = 0.0;
  const auto r = check_scaling(zero);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Suites, MinimizersPassOnAFewStates) {
  MinimizerSetup s;
  s.states = 5;
  s.noise_draws = 20000;
  const auto c = check_contact_minimizer(s);
  const auto o = check_opinion_minimizer(s);
  EXPECT_TRUE(c.passed) << c.detail;
  EXPECT_TRUE(o.passed) << o.detail;
  EXPECT_EQ(c.csv_rows.size(), 5u);
}

TEST(Suites, SteadyStateSmallRun) {
  SteadyStateSetup s;
  s.n_particles = 10000;
  s.t_final = 100.0;
  const auto r = check_steady_state(s, 2);
  EXPECT_TRUE(r.passed) << r.detail;
}

#include <cmath>

#include <gtest/gtest.h>

#include "mvfbsde/lq_analytic.hpp"
#include "mvfbsde/picard.hpp"
#include "mvfbsde/sampling.hpp"

using namespace mvfbsde;

namespace {

LQParams benchmark() { return LQParams{}; }

PathMatrix increments(std::size_t paths, const TimeGrid& g, std::uint64_t seed = 17) {
  return gen_increments({seed, paths, false}, g);
}

}  // namespace

TEST(Rollout, ZeroFieldNoNoiseStaysPut) {
  LQParams p = benchmark();
  p.sigma = 0.0;
  const TimeGrid g = make_grid(1.0, 4);
  const AffineField zero{std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  const PathMatrix X = rollout_states(zero, PathMatrix(3, 4), p, g);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i <= 4; ++i) EXPECT_EQ(X(k, i), 1.0);
  }
}

TEST(Rollout, ConstantFieldDrift) {
  LQParams p = benchmark();
  p.sigma = 0.0;
  p.c_alpha = 2.0;
  const TimeGrid g = make_grid(1.0, 4);
  const AffineField field{std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)};
  const PathMatrix X = rollout_states(field, PathMatrix(1, 4), p, g);
  for (std::size_t i = 0; i <= 4; ++i) EXPECT_DOUBLE_EQ(X(0, i), 1.0 - 0.5 * g.node(i));
}

TEST(Rollout, ExactFieldReproducesReferenceRecursion) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 16);
  const PathMatrix dW = increments(200, g);
  const auto table = tabulate_closed_form(p, g);
  AffineField field;
  for (const auto& v : table) {
    field.slope.push_back(v.eta);
    field.intercept.push_back(v.xi);
  }
  const PathMatrix X = rollout_states(field, dW, p, g);
  const double tau = g.tau();
  for (std::size_t k = 0; k < 200; ++k) {
    double x = p.x0;
    for (std::size_t i = 0; i < 16; ++i) {
      x = x - (table[i].eta * x + table[i].xi) / p.c_alpha * tau + p.sigma * dW(k, i);
      ASSERT_EQ(X(k, i + 1), x);
    }
  }
}

TEST(Rollout, NonFiniteStateRaisesDivergence) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 3);
  PathMatrix dW(4, 3);
  dW(2, 1) = INFINITY;
  const AffineField zero{std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
  try {
    rollout_states(zero, dW, p, g);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 2u);
    EXPECT_EQ(e.path(), 2u);
  }
}

TEST(BackwardPass, VanishingDataGivesZeroWeights) {
  LQParams p = benchmark();
  p.c_x = 0.0;
  p.h_bar = 0.0;
  p.c_g = 0.0;
  const TimeGrid g = make_grid(1.0, 5);
  const PathMatrix dW = increments(100, g);
  const auto pol0 = constant_policy({0.0, 2.0, 4}, 5, 0.0, 0.25);
  const PathMatrix X = rollout_states(PolicyYField{&pol0}, dW, p, g);
  const auto pol = backward_pass(X, dW, p, g, {0.0, 2.0, 4});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(pol.alpha[i][k], 0.0);
      EXPECT_EQ(pol.beta[i][k], 0.0);
    }
  }
}

TEST(BackwardPass, NoNoiseGivesZeroBeta) {
  LQParams p = benchmark();
  p.sigma = 0.0;
  const TimeGrid g = make_grid(1.0, 6);
  const PathMatrix dW(1, 6);
  const auto pol0 = constant_policy({0.0, 2.0, 3}, 6, p.c_g, 1.0 / 3.0);
  const PathMatrix X = rollout_states(PolicyYField{&pol0}, dW, p, g);
  const auto pol = backward_pass(X, dW, p, g, {0.0, 2.0, 3});
  for (const auto& row : pol.beta) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
}

TEST(BackwardPass, SinglePathSingleStepByHand) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 1);
  PathMatrix X(1, 2);
  X(0, 0) = 1.0;
  X(0, 1) = 0.5;
  PathMatrix dW(1, 1);
  dW(0, 0) = 0.2;
  const BasisSpec b{0.0, 2.0, 3};
  const auto pol = backward_pass(X, dW, p, g, b);
  const double y1 = p.c_g * 0.5;
  const double alpha_target = y1 + 1.0 * (p.c_x * 1.0 + p.h_bar / p.c_alpha * y1);
  const double beta_target = 0.2 / 1.0 * y1;
  EXPECT_EQ(pol.alpha[0], (WeightVector{0.0, alpha_target, 0.0}));
  EXPECT_EQ(pol.beta[0], (WeightVector{0.0, beta_target, 0.0}));
}

TEST(BackwardPass, UsesUpdatedFieldAtNextStep) {
  // Two steps, three paths: the step-0 targets must use the step-1 weights
  // refitted in the same sweep.
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 2);
  const BasisSpec b{0.0, 2.0, 4};
  PathMatrix X(3, 3);
  PathMatrix dW(3, 2);
  const double xs[3][3] = {{1.0, 0.4, 0.9}, {1.0, 1.5, 2.5}, {1.0, 0.2, -0.1}};
  const double ws[3][2] = {{0.1, -0.3}, {0.5, 0.2}, {-0.4, 0.05}};
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 3; ++i) X(k, i) = xs[k][i];
    for (std::size_t i = 0; i < 2; ++i) dW(k, i) = ws[k][i];
  }
  const auto pol = backward_pass(X, dW, p, g, b);
  const double tau = 0.5;
  const double m = p.h_bar / p.c_alpha;

  // Step 1: targets from y_2 = c_g x.
  double y2[3];
  double mean2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    y2[k] = p.c_g * xs[k][2];
    mean2 += y2[k] / 3.0;
  }
  double t1[3];
  for (std::size_t k = 0; k < 3; ++k) t1[k] = y2[k] + tau * (p.c_x * xs[k][1] + m * mean2);
  // x_1 bins: 0.4 -> 1, 1.5 -> 2, 0.2 -> 1
  EXPECT_DOUBLE_EQ(pol.alpha[1][1], 0.5 * (t1[0] + t1[2]));
  EXPECT_DOUBLE_EQ(pol.alpha[1][2], t1[1]);

  // Step 0: all x_0 = 1 in bin 2; y_1 from the refitted alpha_1.
  double y1[3] = {pol.alpha[1][1], pol.alpha[1][2], pol.alpha[1][1]};
  const double mean1 = (y1[0] + y1[1] + y1[2]) / 3.0;
  double a0 = 0.0;
  double b0 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    a0 += (y1[k] + tau * (p.c_x * 1.0 + m * mean1)) / 3.0;
    b0 += ws[k][0] / tau * y1[k] / 3.0;
  }
  EXPECT_NEAR(pol.alpha[0][2], a0, 1e-14);
  EXPECT_NEAR(pol.beta[0][2], b0, 1e-14);
  EXPECT_EQ(pol.alpha[0][0], 0.0);
}

TEST(PicardSolve, OneIterationMatchesUnrolledDefinition) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 8);
  const BasisSpec b{0.0, 2.0, 4};
  PicardConfig cfg;
  cfg.iterations = 1;
  cfg.regression_paths = 500;
  const auto result = picard_solve(p, g, b, cfg, 3);

  const PathMatrix dW = picard_increments(cfg, g, 3, 1, p.sigma);
  const auto init = constant_policy(b, 8, p.c_g, 0.25);
  const PathMatrix X = rollout_states(PolicyYField{&init}, dW, p, g);
  const auto pol = backward_pass(X, dW, p, g, b);
  EXPECT_EQ(result.policy.alpha, pol.alpha);
  EXPECT_EQ(result.policy.beta, pol.beta);
  const Ensemble e = policy_ensemble(pol, dW, p, g);
  EXPECT_EQ(result.ensemble.X, e.X);
  EXPECT_EQ(result.ensemble.Y, e.Y);
  EXPECT_EQ(result.ensemble.Z, e.Z);
}

TEST(PicardSolve, EnsembleInvariants) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 11);
  const BasisSpec b{0.0, 2.0, 6};
  PicardConfig cfg;
  cfg.iterations = 3;
  cfg.regression_paths = 2000;
  const auto r = picard_solve(p, g, b, cfg, 8);
  const Ensemble& e = r.ensemble;
  const double tau = g.tau();
  for (std::size_t k = 0; k < e.paths(); ++k) {
    for (std::size_t i = 0; i < 11; ++i) {
      const double expect = e.X(k, i) - e.Y(k, i) / p.c_alpha * tau + p.sigma * e.dW(k, i);
      ASSERT_EQ(e.X(k, i + 1), expect);
      ASSERT_EQ(e.Y(k, i), evaluate_policy(r.policy.alpha[i], e.X(k, i), b));
      ASSERT_EQ(e.Z(k, i), evaluate_policy(r.policy.beta[i], e.X(k, i), b));
    }
    ASSERT_EQ(e.Y(k, 11), p.c_g * e.X(k, 11));
  }
}

TEST(PicardSolve, DeterministicAndSeedSensitive) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 6);
  const BasisSpec b{0.0, 2.0, 4};
  PicardConfig cfg;
  cfg.iterations = 2;
  cfg.regression_paths = 300;
  const auto a = picard_fit(p, g, b, cfg, 5);
  const auto c = picard_fit(p, g, b, cfg, 5);
  const auto d = picard_fit(p, g, b, cfg, 6);
  EXPECT_EQ(a.alpha, c.alpha);
  EXPECT_EQ(a.beta, c.beta);
  EXPECT_NE(a.alpha, d.alpha);
}

TEST(PicardSolve, CommonRandomNumbers) {
  PicardConfig cfg;
  cfg.regression_paths = 50;
  const TimeGrid g = make_grid(1.0, 4);
  EXPECT_NE(picard_increments(cfg, g, 1, 1, 0.7), picard_increments(cfg, g, 1, 2, 0.7));
  cfg.crn = true;
  EXPECT_EQ(picard_increments(cfg, g, 1, 1, 0.7), picard_increments(cfg, g, 1, 2, 0.7));
  EXPECT_EQ(picard_increments(cfg, g, 1, 1, 0.0), PathMatrix(50, 4));
}

TEST(PicardSolve, ApproachesExactInitialValue) {
  const LQParams p = benchmark();
  const TimeGrid g = make_grid(1.0, 16);
  const BasisSpec b{0.0, 2.0, 8};
  PicardConfig cfg;
  cfg.regression_paths = 50000;
  const auto pol = picard_fit(p, g, b, cfg, 2);
  // X_0 = 1 sits in one bin, so alpha_0 there is the fitted Y_0.
  EXPECT_NEAR(pol.y(0, 1.0), 2.43153457368901, 0.1);
}

TEST(PicardSolve, RejectsViolatingParameters) {
  LQParams p = benchmark();
  p.c_alpha = 0.25;
  p.c_x = 1.0;
  const TimeGrid g = make_grid(1.0, 4);
  EXPECT_THROW(picard_fit(p, g, {0.0, 2.0, 3}, {}, 1), MonotonicityViolation);
  PicardConfig bad;
  bad.iterations = 0;
  EXPECT_THROW(picard_fit(benchmark(), g, {0.0, 2.0, 3}, bad, 1), InvalidArgument);
}

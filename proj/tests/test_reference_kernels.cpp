#include <cmath>

#include <gtest/gtest.h>

#include "mvfbsde/lq_analytic.hpp"
#include "mvfbsde/reference.hpp"

using namespace mvfbsde;

TEST(ReferenceKernels, IncrementsIdentical) {
  const TimeGrid g = make_grid(1.0, 12);
  for (bool anti : {false, true}) {
    const SampleConfig cfg{77, 1000, anti};
    EXPECT_EQ(gen_increments(cfg, g), reference::gen_increments(cfg, g));
  }
}

TEST(ReferenceKernels, FitMatches) {
  const TimeGrid g = make_grid(1.0, 1);
  const PathMatrix a = gen_increments({1, 30000, false}, g);
  const PathMatrix b = gen_increments({2, 30000, false}, g);
  std::vector<double> xs(a.column(0).begin(), a.column(0).end());
  for (double& x : xs) x = 1.0 + 2.0 * x;
  const std::vector<double> ts(b.column(0).begin(), b.column(0).end());
  const BasisSpec basis{0.0, 2.0, 9};
  const auto fast = fit_weights(xs, ts, basis);
  const auto slow = reference::fit_weights(xs, ts, basis);
  ASSERT_EQ(fast.size(), slow.size());
  for (std::size_t k = 0; k < fast.size(); ++k) EXPECT_NEAR(fast[k], slow[k], 1e-13);
}

TEST(ReferenceKernels, PicardStepAndEstimatorMatch) {
  const LQParams p;
  const TimeGrid g = make_grid(1.0, 10);
  const BasisSpec basis{0.0, 2.0, 5};
  const PathMatrix dW = gen_increments({3, 9000, false}, g);
  const auto init = constant_policy(basis, 10, p.c_g, 0.2);

  const PathMatrix X = rollout_states(PolicyYField{&init}, dW, p, g);
  EXPECT_EQ(X, reference::rollout_states(init, dW, p, g));

  const auto fast = backward_pass(X, dW, p, g, basis);
  const auto slow = reference::backward_pass(X, dW, p, g, basis);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t k = 0; k < basis.K; ++k) {
      EXPECT_NEAR(fast.alpha[i][k], slow.alpha[i][k], 1e-12);
      EXPECT_NEAR(fast.beta[i][k], slow.beta[i][k], 1e-12);
    }
  }

  const Ensemble e = policy_ensemble(fast, dW, p, g);
  const auto a = evaluate_estimator(e, GeneratorEval::lq(p), g);
  const auto b = reference::evaluate_estimator(e, GeneratorEval::lq(p), g);
  EXPECT_NEAR(a.total, b.total, 1e-12 * a.total);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(a.bwd_profile[i], b.bwd_profile[i], 1e-12 * std::max(1e-12, a.bwd_profile[i]));
  }
}

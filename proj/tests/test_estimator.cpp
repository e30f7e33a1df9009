#include <cmath>

#include <gtest/gtest.h>
#include <omp.h>

#include "mvfbsde/estimator.hpp"
#include "mvfbsde/lq_analytic.hpp"
#include "mvfbsde/picard.hpp"
#include "mvfbsde/sampling.hpp"
#include "mvfbsde/shooting.hpp"

using namespace mvfbsde;

namespace {

struct ExactFixture {
  LQParams p;
  TimeGrid g;
  RiccatiSolution r;
  Ensemble e;
};

ExactFixture exact(std::size_t steps, std::size_t paths, std::uint64_t seed = 4) {
  ExactFixture f{LQParams{}, make_grid(1.0, static_cast<long long>(steps)), {}, {}};
  f.r = riccati_discrete(f.p, f.g);
  f.e = exact_discrete_solution(gen_increments({seed, paths, false}, f.g), f.r, f.p, f.g);
  return f;
}

// Y_i += eps * (1 + 0.5 X_i), Z_i += eps on top of an ensemble.
Ensemble perturb(Ensemble e, double eps) {
  for (std::size_t k = 0; k < e.paths(); ++k) {
    for (std::size_t i = 0; i <= e.grid.steps(); ++i) {
      e.Y(k, i) += eps * (1.0 + 0.5 * e.X(k, i));
      if (i < e.grid.steps()) e.Z(k, i) += eps;
    }
  }
  return e;
}

}  // namespace

TEST(Estimator, VanishesOnExactDiscreteSolution) {
  const auto f = exact(16, 10000);
  const auto rep = evaluate_estimator(f.e, GeneratorEval::lq(f.p, f.r.means(f.p.sigma)), f.g);
  EXPECT_LE(rep.total, 1e-20);
  EXPECT_EQ(rep.init_term, 0.0);
  EXPECT_EQ(rep.martingale_term, 0.0);
  EXPECT_EQ(rep.fwd_profile.size(), 16u);
}

TEST(Estimator, InitialConditionTerm) {
  auto f = exact(4, 10);
  for (std::size_t k = 0; k < 10; ++k) f.e.X(k, 0) += 0.5;
  GeneratorEval gen = GeneratorEval::lq(f.p, f.r.means(f.p.sigma));
  const auto rep = evaluate_estimator(f.e, gen, f.g);
  EXPECT_DOUBLE_EQ(rep.init_term, 0.25);
}

TEST(Estimator, TerminalMismatchOnly) {
  // Y_N shifted by 1 leaves every partial sum except the last one intact.
  auto f = exact(4, 20);
  for (std::size_t k = 0; k < 20; ++k) f.e.Y(k, 4) += 1.0;
  const auto rep = evaluate_estimator(f.e, GeneratorEval::lq(f.p, f.r.means(f.p.sigma)), f.g);
  EXPECT_NEAR(rep.terminal_term, 1.0, 1e-12);
  EXPECT_NEAR(rep.bwd_max, 1.0, 1e-12);
  EXPECT_NEAR(rep.bwd_profile[3], 1.0, 1e-12);
  EXPECT_LE(rep.bwd_profile[2], 1e-24);
  EXPECT_NEAR(rep.total, 2.0, 1e-12);
}

TEST(Estimator, PicardEnsembleMatchesIndependentRecomputation) {
  const LQParams p;
  const TimeGrid g = make_grid(1.0, 8);
  PicardConfig cfg;
  cfg.regression_paths = 3000;
  cfg.iterations = 3;
  const auto res = picard_solve(p, g, {0.0, 2.0, 5}, cfg, 21);
  const Ensemble& e = res.ensemble;
  const auto rep = evaluate_estimator(e, GeneratorEval::lq(p), g);

  // Rollout is exact and Y_N = c_g X_N, so only the backward sums survive.
  EXPECT_EQ(rep.init_term, 0.0);
  EXPECT_EQ(rep.terminal_term, 0.0);
  EXPECT_LE(rep.fwd_max, 1e-26);

  const std::size_t n = 8;
  const std::size_t lambda = e.paths();
  const double tau = g.tau();
  std::vector<double> mean_y(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = 0; k < lambda; ++k) mean_y[i] += e.Y(k, i);
    mean_y[i] /= static_cast<double>(lambda);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < lambda; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) {
        s += (p.c_x * e.X(k, j) + p.h_bar / p.c_alpha * mean_y[j]) * tau - e.Z(k, j) * e.dW(k, j);
      }
      const double b = e.Y(k, i + 1) - e.Y(k, 0) + s;
      acc += b * b;
    }
    best = std::max(best, acc / static_cast<double>(lambda));
  }
  EXPECT_NEAR(rep.total, best, 1e-10 * best);
}

TEST(Estimator, ShootingEnsembleReducesToTerminalTerm) {
  const LQParams p;
  const TimeGrid g = make_grid(1.0, 8);
  const auto dW = shooting_increments(g, 2000, 3);
  const auto sol = solve_shooting(p, g, dW);
  const Ensemble e = shoot_rollout(sol.theta, dW, p, g);
  const auto rep = evaluate_estimator(e, GeneratorEval::lq(p), g);
  EXPECT_NEAR(rep.total, rep.terminal_term, 1e-20);
  EXPECT_NEAR(rep.terminal_term, sol.terminal_loss, 1e-12);
}

TEST(Estimator, QuadraticInPerturbationSize) {
  const auto f = exact(16, 10000);
  const auto gen = GeneratorEval::lq(f.p, f.r.means(f.p.sigma));
  const double t1 = evaluate_estimator(perturb(f.e, 0.1), gen, f.g).total;
  const double t2 = evaluate_estimator(perturb(f.e, 0.05), gen, f.g).total;
  EXPECT_NEAR(t1 / t2, 4.0, 1e-6);
  const auto emp = GeneratorEval::lq(f.p);
  const double e1 = evaluate_estimator(perturb(f.e, 0.1), emp, f.g).total;
  const double e2 = evaluate_estimator(perturb(f.e, 0.05), emp, f.g).total;
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Estimator, AnalyticMeansMustMatchGrid) {
  const auto f = exact(4, 10);
  MeasureSummary m = f.r.means(f.p.sigma);
  m.mean_Z.pop_back();
  EXPECT_THROW(evaluate_estimator(f.e, GeneratorEval::lq(f.p, m), f.g), InvalidArgument);
  EXPECT_THROW(evaluate_estimator(f.e, GeneratorEval::lq(f.p), make_grid(1.0, 5)),
               InvalidArgument);
}

TEST(Estimator, IndependentOfThreadCount) {
  const auto f = exact(8, 20000);
  const auto e = perturb(f.e, 0.3);
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = evaluate_estimator(e, GeneratorEval::lq(f.p), f.g);
  omp_set_num_threads(4);
  const auto b = evaluate_estimator(e, GeneratorEval::lq(f.p), f.g);
  omp_set_num_threads(before);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(a.bwd_profile, b.bwd_profile);
}

TEST(EstimatorRatio, Examples) {
  EstimatorReport rep;
  rep.total = 0.0586;
  EXPECT_NEAR(estimator_vs_error_ratio(rep, 0.0822), 0.0586 / 0.0822, 1e-15);
  rep.total = 2.0;
  EXPECT_EQ(estimator_vs_error_ratio(rep, 4.0), 0.5);
  EXPECT_THROW(estimator_vs_error_ratio(rep, 0.0), InvalidArgument);
  EXPECT_THROW(estimator_vs_error_ratio(rep, -1.0), InvalidArgument);
  EXPECT_THROW(estimator_vs_error_ratio(rep, std::nan("")), InvalidArgument);
}

#include <cmath>

#include <gtest/gtest.h>
#include <omp.h>

#include "mvfbsde/sampling.hpp"

using namespace mvfbsde;

TEST(Sampling, Deterministic) {
  const TimeGrid g = make_grid(1.0, 16);
  const SampleConfig cfg{42, 300, false};
  EXPECT_EQ(gen_increments(cfg, g), gen_increments(cfg, g));
  const SampleConfig other{43, 300, false};
  EXPECT_NE(gen_increments(cfg, g), gen_increments(other, g));
}

TEST(Sampling, PathIndependentOfPathCount) {
  const TimeGrid g = make_grid(1.0, 8);
  const PathMatrix small = gen_increments({5, 10, false}, g);
  const PathMatrix large = gen_increments({5, 25, false}, g);
  for (std::size_t p = 0; p < 10; ++p) {
    for (std::size_t i = 0; i < 8; ++i) ASSERT_EQ(small(p, i), large(p, i));
  }
}

TEST(Sampling, IndependentOfThreadCount) {
  const TimeGrid g = make_grid(1.0, 8);
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const PathMatrix one = gen_increments({9, 5000, false}, g);
  omp_set_num_threads(4);
  const PathMatrix four = gen_increments({9, 5000, false}, g);
  omp_set_num_threads(before);
  EXPECT_EQ(one, four);
}

TEST(Sampling, Antithetic) {
  const TimeGrid g = make_grid(1.0, 6);
  const PathMatrix dW = gen_increments({3, 2, true}, g);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(dW(1, i), -dW(0, i));
  EXPECT_THROW(gen_increments({3, 3, true}, g), InvalidArgument);
  EXPECT_THROW(gen_increments({3, 0, false}, g), InvalidArgument);
}

TEST(Sampling, MomentsMatchNormalWithVarianceTau) {
  const TimeGrid g = make_grid(1.0, 8);
  const std::size_t lambda = 100000;
  const PathMatrix dW = gen_increments({2024, lambda, false}, g);
  const double tau = g.tau();
  for (std::size_t i = 0; i < 8; ++i) {
    double mean = 0.0;
    for (double v : dW.column(i)) mean += v;
    mean /= lambda;
    double var = 0.0;
    for (double v : dW.column(i)) var += (v - mean) * (v - mean);
    var /= lambda - 1;
    EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(tau / lambda)) << "column " << i;
    EXPECT_NEAR(var, tau, 0.05 * tau) << "column " << i;
  }
}

TEST(Sampling, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, {1, 2}), derive_seed(1, {2, 1}));
  EXPECT_NE(derive_seed(1, {1}), derive_seed(2, {1}));
  EXPECT_EQ(derive_seed(1, {1, 2}), derive_seed(1, {1, 2}));
}

#include "mvfbsde/reference.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mvfbsde::reference {

PathMatrix gen_increments(const SampleConfig& cfg, const TimeGrid& grid) {
  cfg.check();
  PathMatrix dW(cfg.paths, grid.steps());
  const double stddev = std::sqrt(grid.tau());
  for (std::size_t path = 0; path < cfg.paths; ++path) {
    if (cfg.antithetic && path % 2 == 1) {
      for (std::size_t i = 0; i < grid.steps(); ++i) dW(path, i) = -dW(path - 1, i);
      continue;
    }
    std::mt19937_64 engine(derive_seed(cfg.seed, {path}));
    std::normal_distribution<double> normal(0.0, stddev);
    for (std::size_t i = 0; i < grid.steps(); ++i) dW(path, i) = normal(engine);
  }
  return dW;
}

WeightVector fit_weights(std::span<const double> xs, std::span<const double> targets,
                         const BasisSpec& basis) {
  basis.check();
  if (xs.empty() || xs.size() != targets.size()) {
    throw InvalidArgument("regression needs matching nonempty inputs");
  }
  std::vector<double> sum(basis.K, 0.0);
  std::vector<double> count(basis.K, 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t b = basis_index(xs[k], basis) - 1;
    sum[b] += targets[k];
    count[b] += 1.0;
  }
  WeightVector w(basis.K, 0.0);
  for (std::size_t b = 0; b < basis.K; ++b) {
    if (count[b] > 0.0) w[b] = sum[b] / count[b];
  }
  return w;
}

PathMatrix rollout_states(const DecoupledPolicy& policy, const PathMatrix& dW,
                          const LQParams& p, const TimeGrid& grid) {
  const std::size_t n = grid.steps();
  PathMatrix X(dW.paths(), n + 1, p.x0);
  for (std::size_t k = 0; k < dW.paths(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = X(k, i);
      X(k, i + 1) = x - policy.y(i, x) / p.c_alpha * grid.tau() + p.sigma * dW(k, i);
      if (!std::isfinite(X(k, i + 1))) throw DivergenceError(i + 1, k);
    }
  }
  return X;
}

DecoupledPolicy backward_pass(const PathMatrix& X, const PathMatrix& dW, const LQParams& p,
                              const TimeGrid& grid, const BasisSpec& basis) {
  const std::size_t n = grid.steps();
  const std::size_t lambda = X.paths();
  const double tau = grid.tau();
  DecoupledPolicy policy = constant_policy(basis, n, p.c_g, 0.0);
  std::vector<double> y_next(lambda);
  std::vector<double> ty(lambda);
  std::vector<double> tz(lambda);
  std::vector<double> x_now(lambda);
  for (std::size_t step = n; step-- > 0;) {
    double mean = 0.0;
    for (std::size_t k = 0; k < lambda; ++k) {
      y_next[k] = policy.y(step + 1, X(k, step + 1));
      mean += y_next[k];
    }
    mean /= static_cast<double>(lambda);
    for (std::size_t k = 0; k < lambda; ++k) {
      x_now[k] = X(k, step);
      ty[k] = y_next[k] + tau * (p.c_x * x_now[k] + p.h_bar / p.c_alpha * mean);
      tz[k] = p.sigma == 0.0 ? 0.0 : dW(k, step) / tau * y_next[k];
    }
    policy.alpha[step] = reference::fit_weights(x_now, ty, basis);
    policy.beta[step] = reference::fit_weights(x_now, tz, basis);
  }
  return policy;
}

EstimatorReport evaluate_estimator(const Ensemble& e, const GeneratorEval& gen,
                                   const TimeGrid& grid) {
  e.check_shape();
  const std::size_t n = grid.steps();
  const std::size_t lambda = e.paths();
  const double tau = grid.tau();
  const auto inv = 1.0 / static_cast<double>(lambda);

  std::vector<StepMeasure> mu(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    if (gen.mean_mode == MeanMode::analytic) {
      mu[i].mean_x = gen.analytic_means.mean_X[i];
      mu[i].mean_y = gen.analytic_means.mean_Y[i];
      mu[i].mean_z = i < n ? gen.analytic_means.mean_Z[i] : 0.0;
      continue;
    }
    for (std::size_t k = 0; k < lambda; ++k) {
      mu[i].mean_x += e.X(k, i) * inv;
      mu[i].mean_y += e.Y(k, i) * inv;
      if (i < n) mu[i].mean_z += e.Z(k, i) * inv;
    }
  }

  EstimatorReport r;
  r.fwd_profile.assign(n, 0.0);
  r.bwd_profile.assign(n, 0.0);
  for (std::size_t k = 0; k < lambda; ++k) {
    r.init_term += std::pow(e.X(k, 0) - gen.x0, 2) * inv;
    r.terminal_term += std::pow(e.Y(k, n) - gen.g(e.X(k, n), mu[n]), 2) * inv;
    double fwd = 0.0;
    double bwd = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = grid.node(j);
      const double x = e.X(k, j), y = e.Y(k, j), z = e.Z(k, j), dw = e.dW(k, j);
      fwd += gen.b(t, x, y, z, mu[j]) * tau + gen.sigma(t, x, y, z, mu[j]) * dw;
      bwd += gen.f(t, x, y, z, mu[j]) * tau - z * dw;
      r.fwd_profile[j] += std::pow(e.X(k, j + 1) - e.X(k, 0) - fwd, 2) * inv;
      r.bwd_profile[j] += std::pow(e.Y(k, j + 1) - e.Y(k, 0) + bwd, 2) * inv;
    }
  }
  r.fwd_max = *std::max_element(r.fwd_profile.begin(), r.fwd_profile.end());
  r.bwd_max = *std::max_element(r.bwd_profile.begin(), r.bwd_profile.end());
  r.total = r.init_term + r.terminal_term + r.fwd_max + r.bwd_max;
  return r;
}

}  // namespace mvfbsde::reference

#include "mvfbsde/picard.hpp"

#include <algorithm>

#include "mvfbsde/reduce.hpp"
#include "mvfbsde/sampling.hpp"

namespace mvfbsde {

namespace {

constexpr std::uint64_t kRegressionStream = 0x52454752;  // "REGR"

bool all_finite(const WeightVector& w) {
  return std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

void DecoupledPolicy::check() const {
  basis.check();
  if (alpha.empty() || alpha.size() != beta.size()) {
    throw InvalidArgument("policy needs matching, nonempty alpha and beta rows");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i].size() != basis.K || beta[i].size() != basis.K) {
      throw InvalidArgument("policy row length differs from K");
    }
    if (!all_finite(alpha[i]) || !all_finite(beta[i])) {
      throw InvalidArgument("policy weights must be finite");
    }
  }
}

DecoupledPolicy constant_policy(const BasisSpec& basis, std::size_t steps, double c_g,
                                double init) {
  basis.check();
  DecoupledPolicy policy;
  policy.basis = basis;
  policy.c_g = c_g;
  policy.alpha.assign(steps, WeightVector(basis.K, init));
  policy.beta.assign(steps, WeightVector(basis.K, 0.0));
  return policy;
}

void PicardConfig::check() const {
  if (iterations < 1) throw InvalidArgument("Picard iteration count must be at least 1");
  if (regression_paths < 1) throw InvalidArgument("regression needs at least one path");
  if (initial_alpha && !std::isfinite(*initial_alpha)) {
    throw InvalidArgument("initial alpha must be finite");
  }
}

DecoupledPolicy backward_pass(const PathMatrix& X, const PathMatrix& dW, const LQParams& p,
                              const TimeGrid& grid, const BasisSpec& basis) {
  basis.check();
  const std::size_t n = grid.steps();
  if (X.columns() != n + 1 || dW.columns() != n || X.paths() != dW.paths()) {
    throw InvalidArgument("states and increments do not match the grid");
  }
  const std::size_t lambda = X.paths();
  const auto n_paths = static_cast<std::ptrdiff_t>(lambda);
  const double tau = grid.tau();
  const double mean_coupling = p.h_bar / p.c_alpha;
  // With sigma = 0 the increments are folded out and the Z target vanishes.
  const double dw_scale = p.sigma == 0.0 ? 0.0 : 1.0 / tau;

  DecoupledPolicy policy;
  policy.basis = basis;
  policy.c_g = p.c_g;
  policy.alpha.assign(n, WeightVector(basis.K, 0.0));
  policy.beta.assign(n, WeightVector(basis.K, 0.0));

  std::vector<double> y_next(lambda);
  std::vector<double> target_y(lambda);
  std::vector<double> target_z(lambda);

  for (std::size_t step = n; step-- > 0;) {
    const auto x_now = X.column(step);
    const auto x_next = X.column(step + 1);
    const auto dw = dW.column(step);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
      const auto k = static_cast<std::size_t>(s);
      y_next[k] = policy.y(step + 1, x_next[k]);
    }
    const double mean_next = reduce::mean(y_next);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
      const auto k = static_cast<std::size_t>(s);
      target_y[k] = y_next[k] + tau * (p.c_x * x_now[k] + mean_coupling * mean_next);
      target_z[k] = dw[k] * dw_scale * y_next[k];
    }

    const std::span<const double> targets[] = {target_y, target_z};
    auto fitted = fit_weights_multi(x_now, targets, basis);
    policy.alpha[step] = std::move(fitted[0]);
    policy.beta[step] = std::move(fitted[1]);
  }
  return policy;
}

Ensemble policy_ensemble(const DecoupledPolicy& policy, const PathMatrix& dW,
                         const LQParams& p, const TimeGrid& grid) {
  if (policy.steps() != grid.steps()) throw InvalidArgument("policy does not match the grid");
  Ensemble e = forward_rollout(PolicyYField{&policy}, dW, p, grid);
  const std::size_t n = grid.steps();
  const auto n_paths = static_cast<std::ptrdiff_t>(e.paths());
  for (std::size_t i = 0; i <= n; ++i) {
    const auto x = e.X.column(i);
    const auto y = e.Y.column(i);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
      const auto k = static_cast<std::size_t>(s);
      y[k] = policy.y(i, x[k]);
    }
    if (i < n) {
      const auto z = e.Z.column(i);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
        const auto k = static_cast<std::size_t>(s);
        z[k] = policy.z(i, x[k]);
      }
    }
  }
  return e;
}

PathMatrix picard_increments(const PicardConfig& cfg, const TimeGrid& grid,
                             std::uint64_t seed, std::size_t iteration, double sigma) {
  if (sigma == 0.0) return PathMatrix(cfg.regression_paths, grid.steps(), 0.0);
  const std::uint64_t tag = cfg.crn ? 0 : iteration;
  SampleConfig sc;
  sc.seed = derive_seed(seed, {kRegressionStream, tag});
  sc.paths = cfg.regression_paths;
  return gen_increments(sc, grid);
}

DecoupledPolicy picard_fit(const LQParams& p, const TimeGrid& grid, const BasisSpec& basis,
                           const PicardConfig& cfg, std::uint64_t seed) {
  validate_lq(p);
  basis.check();
  cfg.check();
  const double init = cfg.initial_alpha.value_or(1.0 / static_cast<double>(basis.K));
  DecoupledPolicy policy = constant_policy(basis, grid.steps(), p.c_g, init);

  PathMatrix dW;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    if (it == 1 || !cfg.crn) {
      dW = PathMatrix();  // release before drawing the next set
      dW = picard_increments(cfg, grid, seed, it, p.sigma);
    }
    const PathMatrix X = rollout_states(PolicyYField{&policy}, dW, p, grid);
    policy = backward_pass(X, dW, p, grid, basis);
  }
  return policy;
}

PicardResult picard_solve(const LQParams& p, const TimeGrid& grid, const BasisSpec& basis,
                          const PicardConfig& cfg, std::uint64_t seed) {
  PicardResult result{picard_fit(p, grid, basis, cfg, seed), {}};
  const PathMatrix dW = picard_increments(cfg, grid, seed, cfg.iterations, p.sigma);
  result.ensemble = policy_ensemble(result.policy, dW, p, grid);
  return result;
}

}  // namespace mvfbsde

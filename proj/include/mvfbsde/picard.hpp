#pragma once

// Markovian Picard iteration for the mean-field LQ system: forward Euler
// rollout with frozen decoupling fields, followed by a backward
// least-squares Monte Carlo pass that refits the fields for Y and Z.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <vector>

#include "mvfbsde/basis.hpp"
#include "mvfbsde/core.hpp"

namespace mvfbsde {

/// Piecewise-constant decoupling fields y_i = alpha_i . gamma and
/// z_i = beta_i . gamma for i < N, with terminal rule y_N(x) = c_g x.
struct DecoupledPolicy {
  BasisSpec basis;
  double c_g = 0.0;
  std::vector<WeightVector> alpha;
  std::vector<WeightVector> beta;

  std::size_t steps() const { return alpha.size(); }
  double y(std::size_t i, double x) const {
    return i == alpha.size() ? c_g * x : alpha[i][basis.bin(x)];
  }
  double z(std::size_t i, double x) const { return beta[i][basis.bin(x)]; }
  /// Throws InvalidArgument on ragged or non-finite weights.
  void check() const;
};

/// Policy with every alpha weight equal to `init` and beta = 0.
DecoupledPolicy constant_policy(const BasisSpec& basis, std::size_t steps, double c_g,
                                double init);

struct PicardConfig {
  std::size_t iterations = 5;
  std::size_t regression_paths = 1000;
  /// Reuse one increment set for every iteration instead of fresh draws.
  bool crn = false;
  /// Initial alpha weight; 1/K when unset.
  std::optional<double> initial_alpha;

  void check() const;
};

/// A field x -> y evaluated per time step.
template <class F>
concept StepField = requires(const F& f, std::size_t i, double x) {
  { f(i, x) } -> std::convertible_to<double>;
};

struct PolicyYField {
  const DecoupledPolicy* policy;
  double operator()(std::size_t i, double x) const { return policy->y(i, x); }
};

/// y_i(x) = slope[i] * x + intercept[i].
struct AffineField {
  std::vector<double> slope;
  std::vector<double> intercept;
  double operator()(std::size_t i, double x) const { return slope[i] * x + intercept[i]; }
};

/// X_{i+1} = X_i - (1/c_alpha) y_i(X_i) tau + sigma dW_i, X_0 = x0.
/// Throws DivergenceError at the first non-finite state.
template <StepField F>
PathMatrix rollout_states(const F& field, const PathMatrix& dW, const LQParams& p,
                          const TimeGrid& grid) {
  const std::size_t n = grid.steps();
  if (dW.columns() != n) throw InvalidArgument("increments must have N columns");
  const std::size_t lambda = dW.paths();
  const auto n_paths = static_cast<std::ptrdiff_t>(lambda);
  const double tau = grid.tau();
  PathMatrix X(lambda, n + 1, p.x0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = X.column(i);
    const auto xn = X.column(i + 1);
    const auto dw = dW.column(i);
    int bad = 0;
#pragma omp parallel for schedule(static) reduction(| : bad)
    for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
      const auto k = static_cast<std::size_t>(s);
      const double v = xi[k] - field(i, xi[k]) / p.c_alpha * tau + p.sigma * dw[k];
      xn[k] = v;
      bad |= std::isfinite(v) ? 0 : 1;
    }
    if (bad) {
      for (std::size_t k = 0; k < lambda; ++k) {
        if (!std::isfinite(xn[k])) throw DivergenceError(i + 1, k);
      }
    }
  }
  return X;
}

/// Ensemble with only X populated (Y and Z zero).
template <StepField F>
Ensemble forward_rollout(const F& field, const PathMatrix& dW, const LQParams& p,
                         const TimeGrid& grid) {
  Ensemble e;
  e.grid = grid;
  e.X = rollout_states(field, dW, p, grid);
  e.Y = PathMatrix(dW.paths(), grid.steps() + 1);
  e.Z = PathMatrix(dW.paths(), grid.steps());
  e.dW = dW;
  return e;
}

/// One backward regression sweep over the states of a prior rollout driven by
/// the same increments. The field at step i+1 used in the targets is the one
/// already refitted in this sweep.
DecoupledPolicy backward_pass(const PathMatrix& X, const PathMatrix& dW, const LQParams& p,
                              const TimeGrid& grid, const BasisSpec& basis);

/// Rolls the policy out and fills Y_i = y_i(X_i), Z_i = z_i(X_i), Y_N = c_g X_N.
Ensemble policy_ensemble(const DecoupledPolicy& policy, const PathMatrix& dW,
                         const LQParams& p, const TimeGrid& grid);

/// Runs the P Picard iterations and returns the final policy.
DecoupledPolicy picard_fit(const LQParams& p, const TimeGrid& grid, const BasisSpec& basis,
                           const PicardConfig& cfg, std::uint64_t seed);

struct PicardResult {
  DecoupledPolicy policy;
  /// Rollout of the final policy on the last iteration's regression increments.
  Ensemble ensemble;
};

PicardResult picard_solve(const LQParams& p, const TimeGrid& grid, const BasisSpec& basis,
                          const PicardConfig& cfg, std::uint64_t seed);

/// Regression increments for Picard iteration `iteration` (1-based).
PathMatrix picard_increments(const PicardConfig& cfg, const TimeGrid& grid,
                             std::uint64_t seed, std::size_t iteration, double sigma);

}  // namespace mvfbsde

#pragma once

// Monte Carlo evaluation of the a posteriori error estimator
//
//   E|X_0 - x0|^2 + E|Y_N - g(X_N)|^2
//     + max_i E|X_{i+1} - X_0 - sum_{j<=i} (b_j tau + sigma_j dW_j)|^2
//     + max_i E|Y_{i+1} - Y_0 + sum_{j<=i} (f_j tau - Z_j dW_j)|^2
//
// for an arbitrary candidate ensemble. Expectations are empirical means over
// the ensemble's paths. The law arguments of the generator are either the
// candidate's own per-step means (one interacting particle system) or a
// supplied deterministic mean trajectory.

#include <functional>
#include <vector>

#include "mvfbsde/core.hpp"

namespace mvfbsde {

enum class MeanMode { empirical, analytic };

struct GeneratorEval {
  using Coefficient =
      std::function<double(double t, double x, double y, double z, const StepMeasure& mu)>;
  using Terminal = std::function<double(double x, const StepMeasure& nu)>;

  Coefficient b;
  Coefficient sigma;
  Coefficient f;
  Terminal g;
  /// Deterministic initial condition xi_0.
  double x0 = 0.0;
  MeanMode mean_mode = MeanMode::empirical;
  /// Used when mean_mode is analytic.
  MeasureSummary analytic_means;

  /// b = -y/c_alpha, sigma = const, f = c_x x + (h_bar/c_alpha) E[Y], g = c_g x.
  static GeneratorEval lq(const LQParams& p);
  static GeneratorEval lq(const LQParams& p, MeasureSummary means);
};

struct EstimatorReport {
  double init_term = 0.0;
  double terminal_term = 0.0;
  double fwd_max = 0.0;
  double bwd_max = 0.0;
  /// The orthogonal-martingale term; identically zero for Brownian drivers.
  double martingale_term = 0.0;
  double total = 0.0;
  /// E|A_i|^2 and E|B_i|^2 for i = 0..N-1.
  std::vector<double> fwd_profile;
  std::vector<double> bwd_profile;
};

EstimatorReport evaluate_estimator(const Ensemble& e, const GeneratorEval& gen,
                                   const TimeGrid& grid);

/// report.total / true_sq_error.
double estimator_vs_error_ratio(const EstimatorReport& report, double true_sq_error);

}  // namespace mvfbsde

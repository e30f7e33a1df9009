#pragma once

// Closed-form solution of the mean-field LQ benchmark, the exact solution of
// its time-discrete counterpart via scalar Riccati recursions, squared-error
// metrics, and a Monte Carlo estimate of the path regularity.

#include <cstdint>
#include <vector>

#include "mvfbsde/core.hpp"

namespace mvfbsde {

struct ClosedFormValue {
  double eta = 0.0;
  double xi = 0.0;
  double bar_eta = 0.0;
  double mean_Y = 0.0;
  double z = 0.0;
};

/// Slope of the affine decoupling field Y_t = eta_t X_t + xi_t.
double closed_form_eta(double t, const LQParams& p);
/// Slope of E[Y_t] = bar_eta_t E[X_t].
double closed_form_bar_eta(double t, const LQParams& p);

/// eta and bar_eta are explicit; E[Y_t] and xi_t use composite trapezoid
/// quadrature with step at most quad_step.
ClosedFormValue eval_closed_form(double t, const LQParams& p, double quad_step);

/// eval_closed_form at every grid node (default quad step tau/50).
std::vector<ClosedFormValue> tabulate_closed_form(const LQParams& p, const TimeGrid& grid,
                                                  double quad_step = 0.0);

/// Reference triple on given increments: X by explicit Euler with drift
/// -(eta X + xi)/c_alpha, Y = eta X + xi, Z_i = sigma eta_{t_i}.
Ensemble exact_triple_on_paths(const PathMatrix& dW, const LQParams& p, const TimeGrid& grid);

struct SquaredError {
  double total = 0.0;
  /// max_i (E|dX_i|^2 + E|dY_i|^2)
  double max_term = 0.0;
  /// sum_i E|dZ_i|^2 tau
  double z_term = 0.0;
  std::vector<double> x_profile;
  std::vector<double> y_profile;
  std::vector<double> z_profile;
};

/// max_i (E|X_i - X'_i|^2 + E|Y_i - Y'_i|^2) + sum_{i<N} E|Z_i - Z'_i|^2 tau
/// between two ensembles on the same grid and path count.
SquaredError squared_error(const Ensemble& candidate, const Ensemble& reference);

/// Squared error of a candidate against exact_triple_on_paths(candidate.dW).
/// The O(N^-2) discretisation remainder of the reference is ignored.
SquaredError true_error(const Ensemble& candidate, const LQParams& p, const TimeGrid& grid);

/// Exact solution of the time-discrete LQ system via the ansatz
/// Y_i = P_i X_i + (Q_i - P_i) mX_i, E[Y_i] = Q_i mX_i, mX_i = E[X_i].
struct RiccatiSolution {
  std::vector<double> P;
  std::vector<double> Q;
  std::vector<double> mX;

  double mean_Y(std::size_t i) const { return Q[i] * mX[i]; }
  double offset(std::size_t i) const { return (Q[i] - P[i]) * mX[i]; }
  /// Analytic law trajectory for the estimator (mean_Z_i = sigma P_{i+1}).
  MeasureSummary means(double sigma) const;
};

/// P_N = Q_N = c_g,
/// P_i = (P_{i+1} + c_x tau) / (1 + P_{i+1} tau/c_alpha),
/// Q_i = (Q_{i+1} + c_x tau) / (1 + Q_{i+1} tau/c_alpha - (h_bar/c_alpha) tau),
/// mX_{i+1} = mX_i (1 - Q_i tau/c_alpha), mX_0 = x0.
/// Throws StepSizeError if a denominator is not positive.
RiccatiSolution riccati_discrete(const LQParams& p, const TimeGrid& grid);

Ensemble exact_discrete_solution(const PathMatrix& dW, const RiccatiSolution& r,
                                 const LQParams& p, const TimeGrid& grid);

/// Pathwise residuals of the discrete system
///   X_{i+1} - X_i - (b tau + sigma dW_i),  Y_{i+1} - Y_i - (-f tau + Z_i dW_i)
/// with the mean field taken from mean_Y (length N+1).
struct DiscreteResidual {
  double max_forward = 0.0;
  double max_backward = 0.0;
  double max_terminal = 0.0;
  /// max over paths, steps and both lines of |residual| / (1 + |X_i|).
  double max_scaled = 0.0;
};

DiscreteResidual discrete_residual(const Ensemble& e, const LQParams& p,
                                   const std::vector<double>& mean_Y);

struct PathRegularity {
  double total = 0.0;
  /// max over cells and t in the cell of E|X_t - X_i|^2 + E|Y_t - Y_i|^2
  double xy_term = 0.0;
  /// sum_i int |Z_t - Zbar_i|^2 dt
  double z_term = 0.0;
};

/// Estimates the path regularity of the exact solution by simulating X on a
/// grid refined fine_factor times with the exact decoupling field.
PathRegularity estimate_path_regularity(const LQParams& p, const TimeGrid& grid,
                                        std::size_t fine_factor, std::size_t paths = 10000,
                                        std::uint64_t seed = 0);

}  // namespace mvfbsde

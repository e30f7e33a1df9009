#pragma once

// Forward shooting for the LQ system: (X, Y) are both rolled forward from
// (x0, y0) with Z_i = z_i, and (y0, z) is chosen to minimise the
// sample-average terminal loss E|Y_N - c_g X_N|^2.

#include <cstdint>
#include <vector>

#include "mvfbsde/core.hpp"

namespace mvfbsde {

struct ShootingParams {
  double y0 = 0.0;
  /// One constant Z value per step.
  std::vector<double> z;
};

/// Joint forward Euler recursion
///   X_{i+1} = X_i - Y_i tau / c_alpha + sigma dW_i
///   Y_{i+1} = Y_i - (c_x X_i + (h_bar/c_alpha) mean(Y_i)) tau + z_i dW_i
/// with the mean over the ensemble. Y_N is left as rolled.
Ensemble shoot_rollout(const ShootingParams& theta, const PathMatrix& dW, const LQParams& p,
                       const TimeGrid& grid);

/// Sample mean of |Y_N - c_g X_N|^2 for the rollout of theta.
double terminal_loss(const ShootingParams& theta, const PathMatrix& dW, const LQParams& p,
                     const TimeGrid& grid);

struct ShootingResult {
  ShootingParams theta;
  double terminal_loss = 0.0;
  /// True when the normal matrix needed a diagonal shift.
  bool regularized = false;
};

/// Exact minimiser of the (quadratic) sample-average terminal loss on the
/// given increments, from N+2 sensitivity rollouts.
ShootingResult solve_shooting(const LQParams& p, const TimeGrid& grid, const PathMatrix& dW);

/// Same, on Lambda fresh increments derived from seed.
ShootingResult solve_shooting(const LQParams& p, const TimeGrid& grid, std::size_t paths,
                              std::uint64_t seed);

/// Increments used by the seeded solve_shooting overload.
PathMatrix shooting_increments(const TimeGrid& grid, std::size_t paths, std::uint64_t seed);

}  // namespace mvfbsde

#pragma once

// Domain types shared by every solver: the time grid, the scalar
// linear-quadratic model, path matrices and ensembles.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvfbsde {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the model parameters do not satisfy the monotonicity condition.
class MonotonicityViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a forward simulation produces a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, std::size_t path);
  std::size_t step() const { return step_; }
  std::size_t path() const { return path_; }

 private:
  std::size_t step_;
  std::size_t path_;
};

/// Raised when a discrete recursion is ill-posed on the chosen grid.
class StepSizeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform partition of [0, T] into N steps.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  double tau() const { return tau_; }
  /// t_i = i * tau, with t_N pinned to T.
  double node(std::size_t i) const;
  std::vector<double> nodes() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  std::size_t steps_;
  double tau_;
};

TimeGrid make_grid(double horizon, long long steps);

/// Parameters of the scalar mean-field LQ system
///   dX = -(1/c_alpha) Y dt + sigma dW,              X_0 = x0
///   dY = -(c_x X + (h_bar/c_alpha) E[Y]) dt + Z dW, Y_T = c_g X_T
/// Defaults are the benchmark values.
struct LQParams {
  double x0 = 1.0;
  double T = 1.0;
  double c_alpha = 10.0 / 3.0;
  double sigma = 0.7;
  double c_x = 2.0;
  double h_bar = 2.0;
  double c_g = 0.3;
};

/// Monotonicity certificate (G, alpha, beta1, beta2) together with a
/// Lipschitz constant L for the generator.
struct MonotonicityCert {
  double G = 1.0;
  double alpha = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double L = 0.0;
};

/// Checks positivity of the parameters and -c_x + h_bar^2/(4 c_alpha) < 0.
/// Throws MonotonicityViolation naming the offending quantity.
MonotonicityCert validate_lq(const LQParams& p);

/// Dense paths x steps matrix stored step-major, so that one time slice over
/// all paths is contiguous.
class PathMatrix {
 public:
  PathMatrix() = default;
  PathMatrix(std::size_t paths, std::size_t columns, double fill = 0.0)
      : paths_(paths), columns_(columns), data_(paths * columns, fill) {}

  std::size_t paths() const { return paths_; }
  std::size_t columns() const { return columns_; }

  double& operator()(std::size_t path, std::size_t col) {
    return data_[col * paths_ + path];
  }
  double operator()(std::size_t path, std::size_t col) const {
    return data_[col * paths_ + path];
  }

  std::span<double> column(std::size_t col) {
    return {data_.data() + col * paths_, paths_};
  }
  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * paths_, paths_};
  }

  std::span<const double> data() const { return data_; }

  bool operator==(const PathMatrix&) const = default;

 private:
  std::size_t paths_ = 0;
  std::size_t columns_ = 0;
  std::vector<double> data_;
};

/// Lambda simulated paths of (X, Y, Z) together with the increments that
/// drove them. X and Y have N+1 columns, Z and dW have N.
struct Ensemble {
  TimeGrid grid{1.0, 1};
  PathMatrix X;
  PathMatrix Y;
  PathMatrix Z;
  PathMatrix dW;

  /// Allocates zeroed X, Y, Z and copies the increments.
  static Ensemble with_increments(const TimeGrid& grid, const PathMatrix& dW);

  std::size_t paths() const { return X.paths(); }
  /// Throws InvalidArgument unless the shapes agree with the grid.
  void check_shape() const;
};

/// Per-step empirical means of an ensemble, or an externally supplied mean
/// trajectory (mean_X and mean_Y of length N+1, mean_Z of length N).
struct MeasureSummary {
  std::vector<double> mean_X;
  std::vector<double> mean_Y;
  std::vector<double> mean_Z;

  static MeasureSummary of(const Ensemble& e);
};

/// The value of one MeasureSummary at a single time step.
struct StepMeasure {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double mean_z = 0.0;
};

}  // namespace mvfbsde

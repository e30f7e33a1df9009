#include "mvfbsde/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvfbsde/reduce.hpp"

namespace mvfbsde {

namespace {

std::string divergence_message(std::size_t step, std::size_t path) {
  std::ostringstream os;
  os << "non-finite state at step " << step << " on path " << path;
  return os.str();
}

}  // namespace

DivergenceError::DivergenceError(std::size_t step, std::size_t path)
    : std::runtime_error(divergence_message(step, path)), step_(step), path_(path) {}

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), tau_(horizon / static_cast<double>(steps)) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("time horizon must be positive and finite");
  }
  if (steps == 0) throw InvalidArgument("step count must be at least 1");
}

double TimeGrid::node(std::size_t i) const {
  if (i > steps_) throw InvalidArgument("grid node index out of range");
  if (i == steps_) return horizon_;
  return static_cast<double>(i) * tau_;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(steps_ + 1);
  for (std::size_t i = 0; i <= steps_; ++i) t[i] = node(i);
  return t;
}

TimeGrid make_grid(double horizon, long long steps) {
  if (steps < 1) throw InvalidArgument("step count must be at least 1");
  return TimeGrid(horizon, static_cast<std::size_t>(steps));
}

MonotonicityCert validate_lq(const LQParams& p) {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw MonotonicityViolation(std::string(name) + " must be positive and finite");
    }
  };
  require_positive(p.T, "T");
  require_positive(p.c_alpha, "c_alpha");
  require_positive(p.c_x, "c_x");
  require_positive(p.c_g, "c_g");
  if (!(p.h_bar >= 0.0) || !std::isfinite(p.h_bar)) {
    throw MonotonicityViolation("h_bar must be nonnegative and finite");
  }
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) {
    throw MonotonicityViolation("sigma must be nonnegative and finite");
  }
  if (!std::isfinite(p.x0)) throw MonotonicityViolation("x0 must be finite");

  const double margin = -p.c_x + p.h_bar * p.h_bar / (4.0 * p.c_alpha);
  if (!(margin < 0.0)) {
    std::ostringstream os;
    os << "monotonicity violated: -c_x + h_bar^2/(4 c_alpha) = " << margin
       << " is not negative";
    throw MonotonicityViolation(os.str());
  }

  MonotonicityCert cert;
  cert.G = 1.0;
  cert.alpha = p.c_g;
  cert.beta1 = 0.0;
  cert.beta2 = -margin;
  // b = -y/c_alpha, f = c_x x + (h_bar/c_alpha) E[Y], g = c_g x.
  cert.L = std::max({1.0 / p.c_alpha, p.c_x, p.h_bar / p.c_alpha, p.c_g});
  return cert;
}

Ensemble Ensemble::with_increments(const TimeGrid& grid, const PathMatrix& dW) {
  if (dW.columns() != grid.steps()) {
    throw InvalidArgument("increments must have one column per time step");
  }
  if (dW.paths() == 0) throw InvalidArgument("ensemble needs at least one path");
  Ensemble e;
  e.grid = grid;
  e.X = PathMatrix(dW.paths(), grid.steps() + 1);
  e.Y = PathMatrix(dW.paths(), grid.steps() + 1);
  e.Z = PathMatrix(dW.paths(), grid.steps());
  e.dW = dW;
  return e;
}

void Ensemble::check_shape() const {
  const std::size_t n = grid.steps();
  const std::size_t lambda = X.paths();
  if (lambda == 0) throw InvalidArgument("ensemble needs at least one path");
  if (Y.paths() != lambda || Z.paths() != lambda || dW.paths() != lambda) {
    throw InvalidArgument("ensemble components have different path counts");
  }
  if (X.columns() != n + 1 || Y.columns() != n + 1) {
    throw InvalidArgument("X and Y must have N+1 columns");
  }
  if (Z.columns() != n || dW.columns() != n) {
    throw InvalidArgument("Z and dW must have N columns");
  }
}

MeasureSummary MeasureSummary::of(const Ensemble& e) {
  e.check_shape();
  const std::size_t n = e.grid.steps();
  MeasureSummary m;
  m.mean_X.resize(n + 1);
  m.mean_Y.resize(n + 1);
  m.mean_Z.resize(n);
  for (std::size_t i = 0; i <= n; ++i) {
    m.mean_X[i] = reduce::mean(e.X.column(i));
    m.mean_Y[i] = reduce::mean(e.Y.column(i));
    if (i < n) m.mean_Z[i] = reduce::mean(e.Z.column(i));
  }
  return m;
}

}  // namespace mvfbsde

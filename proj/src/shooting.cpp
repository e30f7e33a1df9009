#include "mvfbsde/shooting.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "mvfbsde/reduce.hpp"
#include "mvfbsde/sampling.hpp"

namespace mvfbsde {

namespace {

constexpr std::uint64_t kShootingStream = 0x53484f4fULL;  // "SHOO"

void check_theta(const ShootingParams& theta, const PathMatrix& dW, const TimeGrid& grid) {
  if (dW.columns() != grid.steps()) throw InvalidArgument("increments must have N columns");
  if (theta.z.size() != grid.steps()) throw InvalidArgument("need one z value per step");
  if (!std::isfinite(theta.y0)) throw InvalidArgument("y0 must be finite");
  for (double z : theta.z) {
    if (!std::isfinite(z)) throw InvalidArgument("z values must be finite");
  }
}

// Runs the joint recursion; writes every column when `out` is set, otherwise
// only the terminal residual Y_N - c_g X_N into `residual`.
void run_shooting(const ShootingParams& theta, const PathMatrix& dW, const LQParams& p,
                  const TimeGrid& grid, Ensemble* out, std::vector<double>* residual) {
  check_theta(theta, dW, grid);
  const std::size_t n = grid.steps();
  const std::size_t lambda = dW.paths();
  const auto n_paths = static_cast<std::ptrdiff_t>(lambda);
  const double tau = grid.tau();
  std::vector<double> x(lambda, p.x0);
  std::vector<double> y(lambda, theta.y0);

  if (out) {
    std::fill(out->X.column(0).begin(), out->X.column(0).end(), p.x0);
    std::fill(out->Y.column(0).begin(), out->Y.column(0).end(), theta.y0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double mean_y = reduce::mean(y);
    const double drift_mean = p.h_bar / p.c_alpha * mean_y;
    const double zi = theta.z[i];
    const auto dw = dW.column(i);
    int bad = 0;
#pragma omp parallel for schedule(static) reduction(| : bad)
    for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
      const auto k = static_cast<std::size_t>(s);
      const double xk = x[k];
      const double yk = y[k];
      x[k] = xk - yk / p.c_alpha * tau + p.sigma * dw[k];
      y[k] = yk - (p.c_x * xk + drift_mean) * tau + zi * dw[k];
      bad |= (std::isfinite(x[k]) && std::isfinite(y[k])) ? 0 : 1;
    }
    if (bad) {
      for (std::size_t k = 0; k < lambda; ++k) {
        if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw DivergenceError(i + 1, k);
      }
    }
    if (out) {
      std::copy(x.begin(), x.end(), out->X.column(i + 1).begin());
      std::copy(y.begin(), y.end(), out->Y.column(i + 1).begin());
      std::fill(out->Z.column(i).begin(), out->Z.column(i).end(), zi);
    }
  }
  if (residual) {
    residual->resize(lambda);
    for (std::size_t k = 0; k < lambda; ++k) (*residual)[k] = y[k] - p.c_g * x[k];
  }
}

}  // namespace

Ensemble shoot_rollout(const ShootingParams& theta, const PathMatrix& dW, const LQParams& p,
                       const TimeGrid& grid) {
  Ensemble e = Ensemble::with_increments(grid, dW);
  run_shooting(theta, dW, p, grid, &e, nullptr);
  return e;
}

double terminal_loss(const ShootingParams& theta, const PathMatrix& dW, const LQParams& p,
                     const TimeGrid& grid) {
  std::vector<double> r;
  run_shooting(theta, dW, p, grid, nullptr, &r);
  return reduce::mean_of(r.size(), [&r](std::size_t k) { return r[k] * r[k]; });
}

ShootingResult solve_shooting(const LQParams& p, const TimeGrid& grid, const PathMatrix& dW) {
  validate_lq(p);
  const std::size_t n = grid.steps();
  const std::size_t lambda = dW.paths();
  if (lambda == 0) throw InvalidArgument("shooting needs at least one path");
  const std::size_t dim = n + 1;  // y0 followed by z_0..z_{N-1}

  ShootingParams zero{0.0, std::vector<double>(n, 0.0)};
  std::vector<double> base;
  run_shooting(zero, dW, p, grid, nullptr, &base);

  // The terminal residual is affine in theta: r(theta) = base + J theta.
  Eigen::MatrixXd J(lambda, dim);
  std::vector<double> r;
  for (std::size_t c = 0; c < dim; ++c) {
    ShootingParams unit = zero;
    if (c == 0) {
      unit.y0 = 1.0;
    } else {
      unit.z[c - 1] = 1.0;
    }
    run_shooting(unit, dW, p, grid, nullptr, &r);
    for (std::size_t k = 0; k < lambda; ++k) J(k, c) = r[k] - base[k];
  }
  const Eigen::Map<const Eigen::VectorXd> b(base.data(), static_cast<Eigen::Index>(lambda));
  const double inv = 1.0 / static_cast<double>(lambda);
  Eigen::MatrixXd normal = (J.transpose() * J) * inv;
  const Eigen::VectorXd rhs = -(J.transpose() * b) * inv;

  ShootingResult result;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const auto d = ldlt.vectorD();
  const double scale = std::max(1.0, normal.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || d.minCoeff() <= 1e-14 * scale) {
    normal.diagonal().array() += 1e-10;
    ldlt.compute(normal);
    result.regularized = true;
  }
  const Eigen::VectorXd theta = ldlt.solve(rhs);

  result.theta.y0 = theta(0);
  result.theta.z.assign(theta.data() + 1, theta.data() + dim);
  result.terminal_loss = terminal_loss(result.theta, dW, p, grid);
  return result;
}

PathMatrix shooting_increments(const TimeGrid& grid, std::size_t paths, std::uint64_t seed) {
  SampleConfig sc;
  sc.seed = derive_seed(seed, {kShootingStream});
  sc.paths = paths;
  return gen_increments(sc, grid);
}

ShootingResult solve_shooting(const LQParams& p, const TimeGrid& grid, std::size_t paths,
                              std::uint64_t seed) {
  return solve_shooting(p, grid, shooting_increments(grid, paths, seed));
}

}  // namespace mvfbsde

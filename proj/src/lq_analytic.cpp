#include "mvfbsde/lq_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvfbsde/picard.hpp"
#include "mvfbsde/reduce.hpp"
#include "mvfbsde/sampling.hpp"

namespace mvfbsde {

double closed_form_eta(double t, const LQParams& p) {
  const double s = std::sqrt(p.c_x / p.c_alpha);
  const double a = p.c_alpha * s;
  const double e = std::exp(2.0 * s * (p.T - t));
  return -a * (a - p.c_g - (a + p.c_g) * e) / (a - p.c_g + (a + p.c_g) * e);
}

double closed_form_bar_eta(double t, const LQParams& p) {
  const double B = 1.0 / p.c_alpha;
  const double C = p.c_x;
  const double D = -p.h_bar / (2.0 * p.c_alpha);
  const double root = std::sqrt(D * D + B * C);
  const double d_plus = -D + root;
  const double d_minus = -D - root;
  const double e = std::exp((d_plus - d_minus) * (p.T - t));
  const double num = -C * (e - 1.0) - p.c_g * (d_plus * e - d_minus);
  const double den = (d_minus * e - d_plus) - p.c_g * B * (e - 1.0);
  return num / den;
}

ClosedFormValue eval_closed_form(double t, const LQParams& p, double quad_step) {
  if (!(t >= 0.0 && t <= p.T)) throw InvalidArgument("time outside [0, T]");
  if (!(quad_step > 0.0)) throw InvalidArgument("quadrature step must be positive");
  const double B = 1.0 / p.c_alpha;

  // int_0^t bar_eta
  double int_bar = 0.0;
  if (t > 0.0) {
    const auto n0 = static_cast<std::size_t>(std::ceil(t / quad_step));
    const double h = t / static_cast<double>(n0);
    double prev = closed_form_bar_eta(0.0, p);
    for (std::size_t k = 1; k <= n0; ++k) {
      const double cur = closed_form_bar_eta(k == n0 ? t : static_cast<double>(k) * h, p);
      int_bar += 0.5 * h * (prev + cur);
      prev = cur;
    }
  }

  ClosedFormValue v;
  if (t == p.T) {
    v.eta = p.c_g;
    v.bar_eta = p.c_g;
    v.xi = 0.0;
  } else {
    v.eta = closed_form_eta(t, p);
    v.bar_eta = closed_form_bar_eta(t, p);
    // xi_t = (h_bar/c_alpha) int_t^T E[Y_s] exp(-B int_t^s eta) ds
    const auto n1 = static_cast<std::size_t>(std::ceil((p.T - t) / quad_step));
    const double h = (p.T - t) / static_cast<double>(n1);
    double run_bar = int_bar;
    double run_eta = 0.0;
    double prev_bar = v.bar_eta;
    double prev_eta = v.eta;
    double prev_g = p.x0 * prev_bar * std::exp(-B * run_bar);
    double integral = 0.0;
    for (std::size_t k = 1; k <= n1; ++k) {
      const double s = k == n1 ? p.T : t + static_cast<double>(k) * h;
      const double cur_bar = closed_form_bar_eta(s, p);
      const double cur_eta = closed_form_eta(s, p);
      run_bar += 0.5 * h * (prev_bar + cur_bar);
      run_eta += 0.5 * h * (prev_eta + cur_eta);
      const double g = p.x0 * cur_bar * std::exp(-B * run_bar) * std::exp(-B * run_eta);
      integral += 0.5 * h * (prev_g + g);
      prev_bar = cur_bar;
      prev_eta = cur_eta;
      prev_g = g;
    }
    v.xi = p.h_bar / p.c_alpha * integral;
  }
  v.mean_Y = p.x0 * v.bar_eta * std::exp(-B * int_bar);
  v.z = p.sigma * v.eta;
  return v;
}

std::vector<ClosedFormValue> tabulate_closed_form(const LQParams& p, const TimeGrid& grid,
                                                  double quad_step) {
  if (quad_step <= 0.0) quad_step = grid.tau() / 50.0;
  std::vector<ClosedFormValue> table(grid.steps() + 1);
  for (std::size_t i = 0; i <= grid.steps(); ++i) {
    table[i] = eval_closed_form(grid.node(i), p, quad_step);
  }
  return table;
}

namespace {

AffineField closed_form_field(const std::vector<ClosedFormValue>& table) {
  AffineField field;
  field.slope.reserve(table.size());
  field.intercept.reserve(table.size());
  for (const auto& v : table) {
    field.slope.push_back(v.eta);
    field.intercept.push_back(v.xi);
  }
  return field;
}

void fill_affine_y(Ensemble& e, const AffineField& field) {
  const auto n_paths = static_cast<std::ptrdiff_t>(e.paths());
  for (std::size_t i = 0; i <= e.grid.steps(); ++i) {
    const auto x = e.X.column(i);
    const auto y = e.Y.column(i);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n_paths; ++s) {
      const auto k = static_cast<std::size_t>(s);
      y[k] = field(i, x[k]);
    }
  }
}

}  // namespace

Ensemble exact_triple_on_paths(const PathMatrix& dW, const LQParams& p, const TimeGrid& grid) {
  const auto table = tabulate_closed_form(p, grid);
  const AffineField field = closed_form_field(table);
  Ensemble e = forward_rollout(field, dW, p, grid);
  fill_affine_y(e, field);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    std::fill(e.Z.column(i).begin(), e.Z.column(i).end(), p.sigma * table[i].eta);
  }
  return e;
}

SquaredError squared_error(const Ensemble& candidate, const Ensemble& reference) {
  candidate.check_shape();
  reference.check_shape();
  if (!(candidate.grid == reference.grid) || candidate.paths() != reference.paths()) {
    throw InvalidArgument("candidate and reference ensembles differ in shape");
  }
  const std::size_t n = candidate.grid.steps();
  const std::size_t lambda = candidate.paths();
  SquaredError err;
  err.x_profile.resize(n + 1);
  err.y_profile.resize(n + 1);
  err.z_profile.resize(n);
  auto mean_sq_diff = [lambda](std::span<const double> a, std::span<const double> b) {
    return reduce::mean_of(lambda, [a, b](std::size_t k) {
      const double d = a[k] - b[k];
      return d * d;
    });
  };
  for (std::size_t i = 0; i <= n; ++i) {
    err.x_profile[i] = mean_sq_diff(candidate.X.column(i), reference.X.column(i));
    err.y_profile[i] = mean_sq_diff(candidate.Y.column(i), reference.Y.column(i));
    err.max_term = std::max(err.max_term, err.x_profile[i] + err.y_profile[i]);
    if (i < n) {
      err.z_profile[i] = mean_sq_diff(candidate.Z.column(i), reference.Z.column(i));
      err.z_term += err.z_profile[i] * candidate.grid.tau();
    }
  }
  err.total = err.max_term + err.z_term;
  return err;
}

SquaredError true_error(const Ensemble& candidate, const LQParams& p, const TimeGrid& grid) {
  candidate.check_shape();
  if (!(candidate.grid == grid)) throw InvalidArgument("candidate was simulated on another grid");
  return squared_error(candidate, exact_triple_on_paths(candidate.dW, p, grid));
}

MeasureSummary RiccatiSolution::means(double sigma) const {
  MeasureSummary m;
  const std::size_t n = P.size() - 1;
  m.mean_X = mX;
  m.mean_Y.resize(n + 1);
  m.mean_Z.resize(n);
  for (std::size_t i = 0; i <= n; ++i) {
    m.mean_Y[i] = mean_Y(i);
    if (i < n) m.mean_Z[i] = sigma * P[i + 1];
  }
  return m;
}

RiccatiSolution riccati_discrete(const LQParams& p, const TimeGrid& grid) {
  const std::size_t n = grid.steps();
  const double tau = grid.tau();
  const double rate = tau / p.c_alpha;
  RiccatiSolution r;
  r.P.assign(n + 1, p.c_g);
  r.Q.assign(n + 1, p.c_g);
  r.mX.assign(n + 1, p.x0);
  for (std::size_t i = n; i-- > 0;) {
    const double den_p = 1.0 + r.P[i + 1] * rate;
    const double den_q = 1.0 + r.Q[i + 1] * rate - p.h_bar * rate;
    if (!(den_p > 0.0) || !(den_q > 0.0)) {
      std::ostringstream os;
      os << "discrete Riccati recursion is ill-posed at step " << i << " with tau = " << tau
         << "; refine the time grid";
      throw StepSizeError(os.str());
    }
    r.P[i] = (r.P[i + 1] + p.c_x * tau) / den_p;
    r.Q[i] = (r.Q[i + 1] + p.c_x * tau) / den_q;
  }
  for (std::size_t i = 0; i < n; ++i) r.mX[i + 1] = r.mX[i] * (1.0 - r.Q[i] * rate);
  return r;
}

Ensemble exact_discrete_solution(const PathMatrix& dW, const RiccatiSolution& r,
                                 const LQParams& p, const TimeGrid& grid) {
  const std::size_t n = grid.steps();
  if (r.P.size() != n + 1 || r.Q.size() != n + 1 || r.mX.size() != n + 1) {
    throw InvalidArgument("Riccati solution does not match the grid");
  }
  AffineField field;
  field.slope = r.P;
  field.intercept.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) field.intercept[i] = r.offset(i);
  Ensemble e = forward_rollout(field, dW, p, grid);
  fill_affine_y(e, field);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(e.Z.column(i).begin(), e.Z.column(i).end(), r.P[i + 1] * p.sigma);
  }
  return e;
}

DiscreteResidual discrete_residual(const Ensemble& e, const LQParams& p,
                                   const std::vector<double>& mean_Y) {
  e.check_shape();
  const std::size_t n = e.grid.steps();
  if (mean_Y.size() != n + 1) throw InvalidArgument("mean trajectory does not match the grid");
  const double tau = e.grid.tau();
  DiscreteResidual res;
  for (std::size_t k = 0; k < e.paths(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = e.X(k, i);
      const double y = e.Y(k, i);
      const double dw = e.dW(k, i);
      const double fwd = e.X(k, i + 1) - x - (-y / p.c_alpha * tau + p.sigma * dw);
      const double f = p.c_x * x + p.h_bar / p.c_alpha * mean_Y[i];
      const double bwd = e.Y(k, i + 1) - y - (-f * tau + e.Z(k, i) * dw);
      res.max_forward = std::max(res.max_forward, std::abs(fwd));
      res.max_backward = std::max(res.max_backward, std::abs(bwd));
      res.max_scaled =
          std::max(res.max_scaled, std::max(std::abs(fwd), std::abs(bwd)) / (1.0 + std::abs(x)));
    }
    const double term = std::abs(e.Y(k, n) - p.c_g * e.X(k, n));
    res.max_terminal = std::max(res.max_terminal, term);
    res.max_scaled = std::max(res.max_scaled, term / (1.0 + std::abs(e.X(k, n))));
  }
  return res;
}

PathRegularity estimate_path_regularity(const LQParams& p, const TimeGrid& grid,
                                        std::size_t fine_factor, std::size_t paths,
                                        std::uint64_t seed) {
  if (fine_factor < 10) throw InvalidArgument("fine_factor must be at least 10");
  const std::size_t n = grid.steps();
  const TimeGrid fine(grid.horizon(), n * fine_factor);
  const auto table = tabulate_closed_form(p, fine, grid.tau() / 50.0);
  const AffineField field = closed_form_field(table);

  SampleConfig sc;
  sc.seed = derive_seed(seed, {0x52454755ULL, n, fine_factor});
  sc.paths = paths;
  const PathMatrix dW = gen_increments(sc, fine);
  const PathMatrix X = rollout_states(field, dW, p, fine);

  PathRegularity reg;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t base = i * fine_factor;
    const auto x0 = X.column(base);
    for (std::size_t m = base + 1; m <= base + fine_factor; ++m) {
      const auto xm = X.column(m);
      const double sq = reduce::mean_of(paths, [&](std::size_t k) {
        const double dx = xm[k] - x0[k];
        const double dy = field(m, xm[k]) - field(base, x0[k]);
        return dx * dx + dy * dy;
      });
      reg.xy_term = std::max(reg.xy_term, sq);
    }
    // Z is deterministic: Zbar_i is the cell average of sigma eta.
    const double h = fine.tau();
    double avg = 0.0;
    for (std::size_t m = base; m < base + fine_factor; ++m) {
      avg += 0.5 * h * p.sigma * (table[m].eta + table[m + 1].eta);
    }
    avg /= grid.tau();
    for (std::size_t m = base; m < base + fine_factor; ++m) {
      const double a = p.sigma * table[m].eta - avg;
      const double b = p.sigma * table[m + 1].eta - avg;
      reg.z_term += 0.5 * h * (a * a + b * b);
    }
  }
  reg.total = reg.xy_term + reg.z_term;
  return reg;
}

}  // namespace mvfbsde

#include "mvfbsde/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "mvfbsde/reduce.hpp"

namespace mvfbsde {

GeneratorEval GeneratorEval::lq(const LQParams& p) {
  GeneratorEval gen;
  gen.b = [p](double, double, double y, double, const StepMeasure&) { return -y / p.c_alpha; };
  gen.sigma = [p](double, double, double, double, const StepMeasure&) { return p.sigma; };
  gen.f = [p](double, double x, double, double, const StepMeasure& mu) {
    return p.c_x * x + p.h_bar / p.c_alpha * mu.mean_y;
  };
  gen.g = [p](double x, const StepMeasure&) { return p.c_g * x; };
  gen.x0 = p.x0;
  return gen;
}

GeneratorEval GeneratorEval::lq(const LQParams& p, MeasureSummary means) {
  GeneratorEval gen = lq(p);
  gen.mean_mode = MeanMode::analytic;
  gen.analytic_means = std::move(means);
  return gen;
}

namespace {

StepMeasure at(const MeasureSummary& m, std::size_t i) {
  StepMeasure s;
  s.mean_x = m.mean_X[i];
  s.mean_y = m.mean_Y[i];
  s.mean_z = i < m.mean_Z.size() ? m.mean_Z[i] : 0.0;
  return s;
}

}  // namespace

EstimatorReport evaluate_estimator(const Ensemble& e, const GeneratorEval& gen,
                                   const TimeGrid& grid) {
  e.check_shape();
  if (!(e.grid == grid)) throw InvalidArgument("ensemble was simulated on a different grid");
  if (!gen.b || !gen.sigma || !gen.f || !gen.g) {
    throw InvalidArgument("generator is missing an evaluator");
  }
  const std::size_t n = grid.steps();
  const std::size_t lambda = e.paths();
  const double tau = grid.tau();

  MeasureSummary means;
  if (gen.mean_mode == MeanMode::analytic) {
    means = gen.analytic_means;
    if (means.mean_X.size() != n + 1 || means.mean_Y.size() != n + 1 ||
        means.mean_Z.size() != n) {
      throw InvalidArgument("analytic mean trajectory does not match the grid");
    }
  } else {
    means = MeasureSummary::of(e);
  }
  std::vector<StepMeasure> mu(n + 1);
  for (std::size_t i = 0; i <= n; ++i) mu[i] = at(means, i);
  const std::vector<double> t = grid.nodes();

  // Per chunk: [init, terminal, fwd_0..fwd_{N-1}, bwd_0..bwd_{N-1}].
  const std::size_t stride = 2 + 2 * n;
  const std::size_t chunks = reduce::chunk_count(lambda);
  std::vector<double> partial(chunks * stride, 0.0);
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
    double* acc = partial.data() + static_cast<std::size_t>(c) * stride;
    const std::size_t lo = static_cast<std::size_t>(c) * reduce::kChunk;
    const std::size_t hi = std::min(lo + reduce::kChunk, lambda);
    for (std::size_t k = lo; k < hi; ++k) {
      const double x_start = e.X(k, 0);
      const double y_start = e.Y(k, 0);
      const double d0 = x_start - gen.x0;
      acc[0] += d0 * d0;
      const double dn = e.Y(k, n) - gen.g(e.X(k, n), mu[n]);
      acc[1] += dn * dn;

      // Partial sums in time order, extended precision.
      long double fwd_sum = 0.0L;
      long double bwd_sum = 0.0L;
      for (std::size_t j = 0; j < n; ++j) {
        const double x = e.X(k, j);
        const double y = e.Y(k, j);
        const double z = e.Z(k, j);
        const double dw = e.dW(k, j);
        fwd_sum += static_cast<long double>(gen.b(t[j], x, y, z, mu[j])) * tau +
                   static_cast<long double>(gen.sigma(t[j], x, y, z, mu[j])) * dw;
        bwd_sum += static_cast<long double>(gen.f(t[j], x, y, z, mu[j])) * tau -
                   static_cast<long double>(z) * dw;
        const auto a = static_cast<double>(e.X(k, j + 1) - x_start - fwd_sum);
        const auto b = static_cast<double>(e.Y(k, j + 1) - y_start + bwd_sum);
        acc[2 + j] += a * a;
        acc[2 + n + j] += b * b;
      }
    }
  }

  std::vector<double> total(stride, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t q = 0; q < stride; ++q) total[q] += partial[c * stride + q];
  }
  const auto inv = 1.0 / static_cast<double>(lambda);

  EstimatorReport r;
  r.init_term = total[0] * inv;
  r.terminal_term = total[1] * inv;
  r.fwd_profile.resize(n);
  r.bwd_profile.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r.fwd_profile[j] = total[2 + j] * inv;
    r.bwd_profile[j] = total[2 + n + j] * inv;
  }
  r.fwd_max = *std::max_element(r.fwd_profile.begin(), r.fwd_profile.end());
  r.bwd_max = *std::max_element(r.bwd_profile.begin(), r.bwd_profile.end());
  r.total = r.init_term + r.terminal_term + r.fwd_max + r.bwd_max;
  return r;
}

double estimator_vs_error_ratio(const EstimatorReport& report, double true_sq_error) {
  if (!(true_sq_error > 0.0)) throw InvalidArgument("true squared error must be positive");
  return report.total / true_sq_error;
}

}  // namespace mvfbsde

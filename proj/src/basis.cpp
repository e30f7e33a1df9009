#include "mvfbsde/basis.hpp"

#include <algorithm>
#include <cmath>

#include "mvfbsde/reduce.hpp"

namespace mvfbsde {

void BasisSpec::check() const {
  if (K < 3) throw InvalidArgument("basis needs K >= 3");
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw InvalidArgument("basis domain needs finite x_min < x_max");
  }
}

double BasisSpec::edge(std::size_t b) const {
  // Same expression as the bin definition so that edges are reproduced exactly.
  return x_min + (x_max - x_min) * static_cast<double>(b - 1) / static_cast<double>(K - 2);
}

std::size_t BasisSpec::bin(double x) const {
  if (x < x_min) return 0;
  if (!(x < x_max)) return K - 1;
  auto b = static_cast<std::size_t>((x - x_min) / width()) + 1;
  if (b > K - 2) b = K - 2;
  // Correct floating rounding so that edge(b) <= x < edge(b+1).
  while (b > 1 && x < edge(b)) --b;
  while (b < K - 2 && x >= edge(b + 1)) ++b;
  return b;
}

std::size_t basis_index(double x, const BasisSpec& basis) { return basis.bin(x) + 1; }

std::vector<WeightVector> fit_weights_multi(std::span<const double> xs,
                                            std::span<const std::span<const double>> targets,
                                            const BasisSpec& basis) {
  basis.check();
  if (xs.empty()) throw InvalidArgument("regression needs at least one sample");
  for (const auto& t : targets) {
    if (t.size() != xs.size()) throw InvalidArgument("regressor and target lengths differ");
  }
  const std::size_t n = xs.size();
  const std::size_t K = basis.K;
  const std::size_t m = targets.size();
  const std::size_t chunks = reduce::chunk_count(n);

  // Per chunk: K counts followed by m*K sums.
  const std::size_t stride = K * (m + 1);
  std::vector<double> partial(chunks * stride, 0.0);
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
    double* acc = partial.data() + static_cast<std::size_t>(c) * stride;
    const std::size_t lo = static_cast<std::size_t>(c) * reduce::kChunk;
    const std::size_t hi = std::min(lo + reduce::kChunk, n);
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t b = basis.bin(xs[k]);
      acc[b] += 1.0;
      for (std::size_t j = 0; j < m; ++j) acc[K * (j + 1) + b] += targets[j][k];
    }
  }

  std::vector<double> total(stride, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t q = 0; q < stride; ++q) total[q] += partial[c * stride + q];
  }

  std::vector<WeightVector> out(m, WeightVector(K, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t b = 0; b < K; ++b) {
      const double count = total[b];
      if (count > 0.0) out[j][b] = total[K * (j + 1) + b] / count;
    }
  }
  return out;
}

WeightVector fit_weights(std::span<const double> xs, std::span<const double> targets,
                         const BasisSpec& basis) {
  const std::span<const double> one[] = {targets};
  return std::move(fit_weights_multi(xs, one, basis).front());
}

}  // namespace mvfbsde

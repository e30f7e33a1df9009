#pragma once

// Order-independent parallel reductions over paths.
//
// Paths are split into fixed-size chunks that do not depend on the thread
// count; each chunk is summed sequentially and the chunk totals are combined
// in chunk order. Results are therefore bit-identical for any number of
// OpenMP threads.

#include <cstddef>
#include <span>
#include <vector>

namespace mvfbsde::reduce {

inline constexpr std::size_t kChunk = 4096;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

/// Sum of term(k) for k in [0, n).
template <class Term>
double sum_of(std::size_t n, Term&& term) {
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = c * kChunk;
    const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += term(k);
    partial[c] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

inline double sum(std::span<const double> xs) {
  return sum_of(xs.size(), [xs](std::size_t k) { return xs[k]; });
}

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : sum(xs) / static_cast<double>(xs.size());
}

/// Mean of term(k) for k in [0, n).
template <class Term>
double mean_of(std::size_t n, Term&& term) {
  return n == 0 ? 0.0 : sum_of(n, std::forward<Term>(term)) / static_cast<double>(n);
}

}  // namespace mvfbsde::reduce

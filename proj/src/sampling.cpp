#include "mvfbsde/sampling.hpp"

#include <cmath>
#include <random>

namespace mvfbsde {

void SampleConfig::check() const {
  if (paths == 0) throw InvalidArgument("path count must be at least 1");
  if (antithetic && paths % 2 != 0) {
    throw InvalidArgument("antithetic sampling needs an even path count");
  }
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

namespace detail {

void fill_path(PathMatrix& out, std::size_t path, std::uint64_t seed, double stddev) {
  std::mt19937_64 engine(derive_seed(seed, {path}));
  std::normal_distribution<double> normal(0.0, stddev);
  for (std::size_t i = 0; i < out.columns(); ++i) out(path, i) = normal(engine);
}

}  // namespace detail

PathMatrix gen_increments(const SampleConfig& cfg, const TimeGrid& grid) {
  cfg.check();
  PathMatrix dW(cfg.paths, grid.steps());
  const double stddev = std::sqrt(grid.tau());
  const std::size_t sources = cfg.antithetic ? cfg.paths / 2 : cfg.paths;
  const auto n_sources = static_cast<std::ptrdiff_t>(sources);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n_sources; ++s) {
    const auto src = static_cast<std::size_t>(s);
    if (cfg.antithetic) {
      detail::fill_path(dW, 2 * src, cfg.seed, stddev);
      for (std::size_t i = 0; i < dW.columns(); ++i) dW(2 * src + 1, i) = -dW(2 * src, i);
    } else {
      detail::fill_path(dW, src, cfg.seed, stddev);
    }
  }
  return dW;
}

}  // namespace mvfbsde

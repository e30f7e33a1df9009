#pragma once

// Reproducible Brownian increments.
//
// Path p draws from its own std::mt19937_64 seeded with a splitmix64 hash of
// (seed, p), and Gaussians come from std::normal_distribution (the libstdc++
// implementation uses the Marsaglia polar method). Row p is therefore
// independent of the total path count and of the thread schedule. Output is
// reproducible for a given standard library, not across implementations.

#include <cstdint>
#include <initializer_list>

#include "mvfbsde/core.hpp"

namespace mvfbsde {

struct SampleConfig {
  std::uint64_t seed = 0;
  std::size_t paths = 1;
  /// Row 2k+1 is the negation of row 2k; requires an even path count.
  bool antithetic = false;

  void check() const;
};

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed from a base seed and a list of tags
/// (e.g. purpose, study row, Picard iteration).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Lambda x N matrix of i.i.d. Normal(0, tau) increments.
PathMatrix gen_increments(const SampleConfig& cfg, const TimeGrid& grid);

}  // namespace mvfbsde

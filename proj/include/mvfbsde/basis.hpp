#pragma once

// Indicator basis on a computational domain [x_min, x_max] and least-squares
// projection onto it.
//
// gamma_1 = 1_(-inf, x_min), gamma_K = 1_[x_max, inf), and K-2 half-open
// interior bins [left, right) of equal width. The bins partition the real
// line, so the normal equations are diagonal and the least-squares fit is the
// per-bin mean of the targets.

#include <span>
#include <vector>

#include "mvfbsde/core.hpp"

namespace mvfbsde {

struct BasisSpec {
  double x_min = 0.0;
  double x_max = 2.0;
  std::size_t K = 3;

  void check() const;
  double width() const { return (x_max - x_min) / static_cast<double>(K - 2); }
  /// Left edge of interior bin b (0-based bin index, 1 <= b <= K-1).
  double edge(std::size_t b) const;
  /// 0-based bin of x. NaN maps to the last bin.
  std::size_t bin(double x) const;

  bool operator==(const BasisSpec&) const = default;
};

/// One regression coefficient per basis function.
using WeightVector = std::vector<double>;

/// 1-based index k of the unique basis function with gamma_k(x) = 1.
std::size_t basis_index(double x, const BasisSpec& basis);

/// Least-squares weights of targets on the basis evaluated at xs.
/// Empty bins receive weight 0.
WeightVector fit_weights(std::span<const double> xs, std::span<const double> targets,
                         const BasisSpec& basis);

/// Fits several target vectors against the same regressor in one pass.
std::vector<WeightVector> fit_weights_multi(std::span<const double> xs,
                                            std::span<const std::span<const double>> targets,
                                            const BasisSpec& basis);

inline double evaluate_policy(std::span<const double> w, double x, const BasisSpec& basis) {
  return w[basis.bin(x)];
}

}  // namespace mvfbsde

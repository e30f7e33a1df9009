#pragma once

// Convergence studies over the (N, K, Lambda) schedule
//   N = [2 sqrt2^(j-1)], K = max(ceil(sqrt2^(j-1)), 3), Lambda = [2 sqrt2^(l(j-1))]
// where [x] rounds to the nearest integer (halves away from zero).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvfbsde/core.hpp"

namespace mvfbsde {

struct ScheduleEntry {
  long j = 0;
  long l = 0;
  std::size_t N = 0;
  std::size_t K = 0;
  std::size_t Lambda = 0;
};

ScheduleEntry schedule(long j, long l);

struct StudyConfig {
  LQParams params;
  long j_min = 2;
  long j_max = 9;
  long l = 4;
  std::size_t picard_iterations = 5;
  std::uint64_t seed = 1;
  std::size_t eval_paths = 10000;
  double x_min = 0.0;
  double x_max = 2.0;
  bool crn = false;
  /// Lifts the default cap (j <= 8 for l = 5, j <= 9 otherwise).
  bool allow_large = false;
};

struct StudyRow {
  long j = 0;
  long l = 0;
  std::size_t N = 0;
  std::size_t K = 0;
  std::size_t Lambda = 0;
  std::size_t P = 0;
  std::uint64_t seed = 0;
  double estimator_total = 0.0;
  double true_sq_error = 0.0;
  double ratio = 0.0;
  double runtime_seconds = 0.0;

  bool diverged() const;
};

/// Largest j allowed for schedule parameter l without allow_large.
long default_j_cap(long l);

/// One study row: Picard fit at schedule(j, l), then estimator and true error
/// on eval_paths independent evaluation paths. Regression and evaluation
/// randomness derive from (seed, j, l). A diverged solve yields a row with
/// infinite error fields.
StudyRow run_study_row(const StudyConfig& cfg, long j);

std::vector<StudyRow> run_study(const StudyConfig& cfg);

/// Least-squares slope of log(value) against log(N) over finite positive values.
/// Throws InsufficientData with fewer than three usable points.
double fit_loglog_slope(const std::vector<double>& N, const std::vector<double>& values);

/// Slope of log(estimator_total) against log(N).
double fit_slope(const std::vector<StudyRow>& rows);

inline constexpr const char* kStudyCsvHeader =
    "j,l,N,K,Lambda,P,seed,estimator_total,true_sq_error,ratio,runtime_seconds";

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);
std::vector<StudyRow> read_study_csv(std::istream& is);

}  // namespace mvfbsde

#include "mvfbsde/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mvfbsde/basis.hpp"
#include "mvfbsde/estimator.hpp"
#include "mvfbsde/lq_analytic.hpp"
#include "mvfbsde/picard.hpp"
#include "mvfbsde/sampling.hpp"

namespace mvfbsde {

namespace {

constexpr std::uint64_t kRegressionTag = 0x5245;
constexpr std::uint64_t kEvaluationTag = 0x4556;

// sqrt(2)^m without the rounding drift of pow() at even m.
double sqrt2_pow(long m) {
  const int half = static_cast<int>(m / 2);
  return m % 2 == 0 ? std::ldexp(1.0, half) : std::ldexp(std::sqrt(2.0), half);
}

std::size_t round_nearest(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

ScheduleEntry schedule(long j, long l) {
  if (j < 2) throw InvalidArgument("schedule needs j >= 2");
  if (l < 3 || l > 5) throw InvalidArgument("schedule needs l in {3, 4, 5}");
  if (l * (j - 1) > 120) throw InvalidArgument("schedule sample size overflows");
  ScheduleEntry e;
  e.j = j;
  e.l = l;
  e.N = round_nearest(2.0 * sqrt2_pow(j - 1));
  e.K = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(sqrt2_pow(j - 1))), 3);
  e.Lambda = round_nearest(2.0 * sqrt2_pow(l * (j - 1)));
  return e;
}

bool StudyRow::diverged() const { return !std::isfinite(estimator_total); }

long default_j_cap(long l) { return l >= 5 ? 8 : 9; }

StudyRow run_study_row(const StudyConfig& cfg, long j) {
  const auto start = std::chrono::steady_clock::now();
  const ScheduleEntry entry = schedule(j, cfg.l);
  StudyRow row;
  row.j = j;
  row.l = cfg.l;
  row.N = entry.N;
  row.K = entry.K;
  row.Lambda = entry.Lambda;
  row.P = cfg.picard_iterations;
  row.seed = cfg.seed;

  const TimeGrid grid(cfg.params.T, entry.N);
  const BasisSpec basis{cfg.x_min, cfg.x_max, entry.K};
  PicardConfig pc;
  pc.iterations = cfg.picard_iterations;
  pc.regression_paths = entry.Lambda;
  pc.crn = cfg.crn;
  const auto ju = static_cast<std::uint64_t>(j);
  const auto lu = static_cast<std::uint64_t>(cfg.l);

  try {
    const DecoupledPolicy policy =
        picard_fit(cfg.params, grid, basis, pc, derive_seed(cfg.seed, {kRegressionTag, ju, lu}));
    SampleConfig sc;
    sc.seed = derive_seed(cfg.seed, {kEvaluationTag, ju, lu});
    sc.paths = cfg.eval_paths;
    const Ensemble candidate = policy_ensemble(policy, gen_increments(sc, grid), cfg.params, grid);
    row.estimator_total =
        evaluate_estimator(candidate, GeneratorEval::lq(cfg.params), grid).total;
    row.true_sq_error = true_error(candidate, cfg.params, grid).total;
    row.ratio = row.true_sq_error > 0.0 ? row.estimator_total / row.true_sq_error
                                        : std::numeric_limits<double>::infinity();
  } catch (const DivergenceError&) {
    row.estimator_total = std::numeric_limits<double>::infinity();
    row.true_sq_error = std::numeric_limits<double>::infinity();
    row.ratio = std::numeric_limits<double>::infinity();
  }
  row.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<StudyRow> run_study(const StudyConfig& cfg) {
  validate_lq(cfg.params);
  if (cfg.j_min > cfg.j_max) throw InvalidArgument("empty j range");
  if (cfg.eval_paths < 1) throw InvalidArgument("evaluation needs at least one path");
  schedule(cfg.j_min, cfg.l);
  if (!cfg.allow_large && cfg.j_max > default_j_cap(cfg.l)) {
    std::ostringstream os;
    os << "j = " << cfg.j_max << " exceeds the default cap " << default_j_cap(cfg.l)
       << " for l = " << cfg.l << "; pass the override flag to run it";
    throw InvalidArgument(os.str());
  }
  std::vector<StudyRow> rows;
  for (long j = cfg.j_min; j <= cfg.j_max; ++j) rows.push_back(run_study_row(cfg, j));
  return rows;
}

double fit_loglog_slope(const std::vector<double>& N, const std::vector<double>& values) {
  if (N.size() != values.size()) throw InvalidArgument("slope fit inputs differ in length");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < N.size(); ++k) {
    if (N[k] > 0.0 && values[k] > 0.0 && std::isfinite(values[k])) {
      lx.push_back(std::log(N[k]));
      ly.push_back(std::log(values[k]));
    }
  }
  if (lx.size() < 3) throw InsufficientData("slope fit needs at least three finite points");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0.0) throw InsufficientData("slope fit needs at least two distinct N");
  return sxy / sxx;
}

double fit_slope(const std::vector<StudyRow>& rows) {
  std::vector<double> n;
  std::vector<double> v;
  for (const auto& r : rows) {
    n.push_back(static_cast<double>(r.N));
    v.push_back(r.estimator_total);
  }
  return fit_loglog_slope(n, v);
}

namespace {

void put_real(std::ostream& os, double v) {
  if (std::isfinite(v)) {
    os << v;
  } else {
    os << "inf";
  }
}

double parse_real(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InvalidArgument("malformed number in study CSV: " + s);
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw InvalidArgument("malformed integer in study CSV: " + s);
  return static_cast<Int>(v);
}

}  // namespace

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  os << kStudyCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.j << ',' << r.l << ',' << r.N << ',' << r.K << ',' << r.Lambda << ',' << r.P << ','
       << r.seed << ',';
    put_real(os, r.estimator_total);
    os << ',';
    put_real(os, r.true_sq_error);
    os << ',';
    put_real(os, r.ratio);
    os << ',';
    put_real(os, r.runtime_seconds);
    os << '\n';
  }
  os.precision(old_precision);
}

std::vector<StudyRow> read_study_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kStudyCsvHeader) {
    throw InvalidArgument("study CSV header does not match the schema");
  }
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw InvalidArgument("study CSV row needs 11 fields");
    StudyRow r;
    r.j = parse_int<long>(f[0]);
    r.l = parse_int<long>(f[1]);
    r.N = parse_int<std::size_t>(f[2]);
    r.K = parse_int<std::size_t>(f[3]);
    r.Lambda = parse_int<std::size_t>(f[4]);
    r.P = parse_int<std::size_t>(f[5]);
    r.seed = parse_int<std::uint64_t>(f[6]);
    r.estimator_total = parse_real(f[7]);
    r.true_sq_error = parse_real(f[8]);
    r.ratio = parse_real(f[9]);
    r.runtime_seconds = parse_real(f[10]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mvfbsde

// Command-line front end: solve, estimate, shoot, oracle, schedule, study.
//
// Exit codes: 0 success, 2 invalid arguments, 3 monotonicity (validation)
// failure, 1 any other runtime error.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvfbsde/config.hpp"
#include "mvfbsde/lq_analytic.hpp"
#include "mvfbsde/reduce.hpp"
#include "mvfbsde/sampling.hpp"
#include "mvfbsde/study.hpp"

namespace {

using nlohmann::json;
using namespace mvfbsde;

constexpr int kExitInvalid = 2;
constexpr int kExitValidation = 3;

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
};

json load_config(const Common& c) {
  return c.config.empty() ? json::object() : load_json_file(c.config);
}

// Writes the document to --out (and the summary to stdout) or the document to
// stdout (and the summary to stderr).
void emit(const Common& c, const std::string& document, const std::string& summary) {
  if (c.out.empty()) {
    std::cout << document << '\n';
    if (!summary.empty()) std::cerr << summary << '\n';
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw InvalidArgument("cannot write " + c.out);
  os << document << '\n';
  if (!summary.empty()) std::cout << summary << '\n';
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON parameter file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "base random seed");
  cmd->add_option("--out", c.out, "output file (default stdout)");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

int run_solve(const Common& c, std::size_t steps, std::optional<std::size_t> K,
              std::optional<std::size_t> P, std::optional<std::size_t> paths, bool crn) {
  const json cfg = load_config(c);
  const LQParams p = params_from_json(cfg);
  validate_lq(p);
  BasisSpec basis = basis_from_json(cfg, BasisSpec{0.0, 2.0, 16});
  if (K) basis.K = *K;
  basis.check();
  PicardConfig pc = picard_from_json(cfg, PicardConfig{});
  if (P) pc.iterations = *P;
  if (paths) pc.regression_paths = *paths;
  if (crn) pc.crn = true;
  pc.check();
  const TimeGrid grid = make_grid(p.T, static_cast<long long>(steps));

  const auto start = std::chrono::steady_clock::now();
  const PicardResult result = picard_solve(p, grid, basis, pc, c.seed);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json doc = policy_to_json(result.policy, grid);
  const double mean_y0 = reduce::mean(result.ensemble.Y.column(0));
  const double mean_xn = reduce::mean(result.ensemble.X.column(grid.steps()));
  doc["summary"] = {{"P", pc.iterations},
                    {"lambda_reg", pc.regression_paths},
                    {"crn", pc.crn},
                    {"seed", c.seed},
                    {"y0_at_x0", result.policy.y(0, p.x0)},
                    {"mean_Y0", mean_y0},
                    {"mean_XN", mean_xn},
                    {"runtime_seconds", seconds}};
  emit(c, doc.dump(2),
       "solve: N=" + std::to_string(grid.steps()) + " K=" + std::to_string(basis.K) +
           " P=" + std::to_string(pc.iterations) + " Lambda=" +
           std::to_string(pc.regression_paths) + " y0(x0)=" + fmt(result.policy.y(0, p.x0)));
  return 0;
}

int run_estimate(const Common& c, const std::string& policy_file, bool oracle, std::size_t steps,
                 std::size_t paths) {
  if (oracle == !policy_file.empty()) {
    throw InvalidArgument("estimate needs exactly one of --policy or --oracle");
  }
  const json cfg = load_config(c);
  const LQParams p = params_from_json(cfg);
  validate_lq(p);

  json doc;
  EstimatorReport report;
  if (oracle) {
    const TimeGrid grid = make_grid(p.T, static_cast<long long>(steps));
    const RiccatiSolution r = riccati_discrete(p, grid);
    SampleConfig sc{derive_seed(c.seed, {0x4553}), paths, false};
    const Ensemble e = exact_discrete_solution(gen_increments(sc, grid), r, p, grid);
    report = evaluate_estimator(e, GeneratorEval::lq(p, r.means(p.sigma)), grid);
    doc = report_to_json(report);
    doc["mean_mode"] = "analytic";
    doc["candidate"] = "oracle";
  } else {
    TimeGrid grid(1.0, 1);
    DecoupledPolicy policy = policy_from_json(load_json_file(policy_file), grid);
    if (grid.horizon() != p.T) throw InvalidArgument("policy horizon differs from config T");
    policy.c_g = p.c_g;
    SampleConfig sc{derive_seed(c.seed, {0x4553}), paths, false};
    const Ensemble e = policy_ensemble(policy, gen_increments(sc, grid), p, grid);
    report = evaluate_estimator(e, GeneratorEval::lq(p), grid);
    const SquaredError err = true_error(e, p, grid);
    doc = report_to_json(report);
    doc["mean_mode"] = "empirical";
    doc["candidate"] = policy_file;
    doc["true_sq_error"] = err.total;
    doc["ratio"] = err.total > 0.0 ? report.total / err.total
                                   : std::numeric_limits<double>::infinity();
    doc["true_error_note"] = "reference solution error of order N^-2 not included";
  }
  doc["paths"] = paths;
  doc["seed"] = c.seed;
  emit(c, doc.dump(2),
       "estimate: total=" + fmt(report.total) + " init=" + fmt(report.init_term) +
           " terminal=" + fmt(report.terminal_term) + " fwd_max=" + fmt(report.fwd_max) +
           " bwd_max=" + fmt(report.bwd_max));
  return 0;
}

int run_shoot(const Common& c, std::size_t steps, std::size_t paths) {
  const json cfg = load_config(c);
  const LQParams p = params_from_json(cfg);
  const TimeGrid grid = make_grid(p.T, static_cast<long long>(steps));
  const ShootingResult result = solve_shooting(p, grid, paths, c.seed);
  json doc = shooting_to_json(result);
  doc["paths"] = paths;
  doc["seed"] = c.seed;
  doc["N"] = steps;
  emit(c, doc.dump(2),
       "shoot: y0=" + fmt(result.theta.y0) + " terminal_loss=" + fmt(result.terminal_loss) +
           (result.regularized ? " (regularized)" : ""));
  return 0;
}

int run_oracle(const Common& c, std::size_t steps, std::size_t paths) {
  const json cfg = load_config(c);
  const LQParams p = params_from_json(cfg);
  const TimeGrid grid = make_grid(p.T, static_cast<long long>(steps));
  const RiccatiSolution r = riccati_discrete(p, grid);

  std::ostringstream csv;
  csv.precision(std::numeric_limits<double>::max_digits10);
  csv << "i,t,P,Q,mX\n";
  for (std::size_t i = 0; i <= grid.steps(); ++i) {
    csv << i << ',' << grid.node(i) << ',' << r.P[i] << ',' << r.Q[i] << ',' << r.mX[i] << '\n';
  }
  SampleConfig sc{derive_seed(c.seed, {0x4f52}), paths, false};
  const Ensemble e = exact_discrete_solution(gen_increments(sc, grid), r, p, grid);
  std::vector<double> mean_y(grid.steps() + 1);
  for (std::size_t i = 0; i <= grid.steps(); ++i) mean_y[i] = r.mean_Y(i);
  const DiscreteResidual res = discrete_residual(e, p, mean_y);

  std::string doc = csv.str();
  doc.pop_back();
  std::ostringstream summary;
  summary.precision(3);
  summary << "max residual: " << std::scientific << res.max_scaled
          << " (forward " << res.max_forward << ", backward " << res.max_backward
          << ", terminal " << res.max_terminal << ")";
  emit(c, doc, summary.str());
  return 0;
}

int run_schedule(long j, long l) {
  const ScheduleEntry e = schedule(j, l);
  std::cout << json{{"j", e.j}, {"l", e.l}, {"N", e.N}, {"K", e.K}, {"Lambda", e.Lambda}}.dump()
            << '\n';
  return 0;
}

int run_study_cmd(const Common& c, StudyConfig sc) {
  const json cfg = load_config(c);
  sc.params = params_from_json(cfg);
  const BasisSpec domain = basis_from_json(cfg, BasisSpec{sc.x_min, sc.x_max, 3});
  sc.x_min = domain.x_min;
  sc.x_max = domain.x_max;
  sc.seed = c.seed;
  const auto rows = run_study(sc);

  std::ostringstream csv;
  write_study_csv(csv, rows);
  std::string doc = csv.str();
  doc.pop_back();
  std::string summary = "study: " + std::to_string(rows.size()) + " rows";
  try {
    summary += ", estimator slope " + fmt(fit_slope(rows));
  } catch (const InsufficientData&) {
  }
  emit(c, doc, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field FBSDE solvers and a posteriori error estimation"};
  app.require_subcommand(1);

  Common common;

  std::size_t solve_n = 32;
  std::optional<std::size_t> solve_k, solve_p, solve_paths;
  bool solve_crn = false;
  auto* solve = app.add_subcommand("solve", "Picard least-squares Monte Carlo solve");
  add_common(solve, common);
  solve->add_option("--N", solve_n, "time steps")->check(CLI::PositiveNumber);
  solve->add_option("--K", solve_k, "basis functions (>= 3)");
  solve->add_option("--picard", solve_p, "Picard iterations");
  solve->add_option("--paths", solve_paths, "regression paths");
  solve->add_flag("--crn", solve_crn, "reuse one increment set across iterations");

  std::string est_policy;
  bool est_oracle = false;
  std::size_t est_n = 32;
  std::size_t est_paths = 10000;
  auto* estimate = app.add_subcommand("estimate", "evaluate the a posteriori error estimator");
  add_common(estimate, common);
  estimate->add_option("--policy", est_policy, "policy JSON from `solve`");
  estimate->add_flag("--oracle", est_oracle, "use the exact discrete solution");
  estimate->add_option("--N", est_n, "time steps for --oracle")->check(CLI::PositiveNumber);
  estimate->add_option("--paths", est_paths, "evaluation paths")->check(CLI::PositiveNumber);

  std::size_t shoot_n = 32;
  std::size_t shoot_paths = 10000;
  auto* shoot = app.add_subcommand("shoot", "forward shooting with terminal-loss minimisation");
  add_common(shoot, common);
  shoot->add_option("--N", shoot_n, "time steps")->check(CLI::PositiveNumber);
  shoot->add_option("--paths", shoot_paths, "sample paths")->check(CLI::PositiveNumber);

  std::size_t oracle_n = 32;
  std::size_t oracle_paths = 1000;
  auto* oracle = app.add_subcommand("oracle", "discrete Riccati solution and residual check");
  add_common(oracle, common);
  oracle->add_option("--N", oracle_n, "time steps")->check(CLI::PositiveNumber);
  oracle->add_option("--paths", oracle_paths, "paths for the residual check")
      ->check(CLI::PositiveNumber);

  long sched_j = 2;
  long sched_l = 4;
  auto* sched = app.add_subcommand("schedule", "print N, K, Lambda for (j, l)");
  sched->add_option("--j", sched_j, "refinement level (>= 2)")->required();
  sched->add_option("--l", sched_l, "sample-size exponent (3, 4 or 5)")->required();

  StudyConfig study_cfg;
  auto* study = app.add_subcommand("study", "convergence study over the schedule");
  add_common(study, common);
  study->add_option("--l", study_cfg.l, "sample-size exponent")->check(CLI::IsMember({3, 4, 5}));
  study->add_option("--j-min", study_cfg.j_min, "first refinement level");
  study->add_option("--j-max", study_cfg.j_max, "last refinement level");
  study->add_option("--picard", study_cfg.picard_iterations, "Picard iterations");
  study->add_option("--eval-paths", study_cfg.eval_paths, "evaluation paths");
  study->add_flag("--allow-large", study_cfg.allow_large, "lift the default j cap");
  study->add_flag("--crn", study_cfg.crn, "reuse increments across Picard iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*solve) return run_solve(common, solve_n, solve_k, solve_p, solve_paths, solve_crn);
    if (*estimate) return run_estimate(common, est_policy, est_oracle, est_n, est_paths);
    if (*shoot) return run_shoot(common, shoot_n, shoot_paths);
    if (*oracle) return run_oracle(common, oracle_n, oracle_paths);
    if (*sched) return run_schedule(sched_j, sched_l);
    if (*study) return run_study_cmd(common, study_cfg);
  } catch (const MonotonicityViolation& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

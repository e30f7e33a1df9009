#include "mvfbsde/config.hpp"

#include <fstream>

namespace mvfbsde {

using nlohmann::json;

namespace {

double number_or(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number()) throw InvalidArgument(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

std::size_t count_or(const json& doc, const char* key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InvalidArgument(std::string("config key '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<WeightVector> weight_rows(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw InvalidArgument(std::string("policy document needs array '") + key + "'");
  }
  std::vector<WeightVector> rows;
  for (const auto& row : doc.at(key)) {
    if (!row.is_array()) throw InvalidArgument("policy weights must be nested arrays");
    WeightVector w;
    for (const auto& v : row) {
      if (!v.is_number()) throw InvalidArgument("policy weights must be numbers");
      w.push_back(v.get<double>());
    }
    rows.push_back(std::move(w));
  }
  return rows;
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("cannot parse " + path + ": " + e.what());
  }
}

LQParams params_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("parameter config must be a JSON object");
  LQParams p;
  p.x0 = number_or(doc, "x0", p.x0);
  p.T = number_or(doc, "T", p.T);
  p.c_alpha = number_or(doc, "c_alpha", p.c_alpha);
  p.sigma = number_or(doc, "sigma", p.sigma);
  p.c_x = number_or(doc, "c_x", p.c_x);
  p.h_bar = number_or(doc, "h_bar", p.h_bar);
  p.c_g = number_or(doc, "c_g", p.c_g);
  return p;
}

json params_to_json(const LQParams& p) {
  return {{"x0", p.x0},   {"T", p.T},         {"c_alpha", p.c_alpha}, {"sigma", p.sigma},
          {"c_x", p.c_x}, {"h_bar", p.h_bar}, {"c_g", p.c_g}};
}

BasisSpec basis_from_json(const json& doc, BasisSpec fallback) {
  if (doc.is_object() && doc.contains("basis")) {
    const json& b = doc.at("basis");
    if (!b.is_object()) throw InvalidArgument("'basis' must be an object");
    fallback.x_min = number_or(b, "x_min", fallback.x_min);
    fallback.x_max = number_or(b, "x_max", fallback.x_max);
    fallback.K = count_or(b, "K", fallback.K);
  }
  fallback.check();
  return fallback;
}

PicardConfig picard_from_json(const json& doc, PicardConfig fallback) {
  if (doc.is_object() && doc.contains("picard")) {
    const json& c = doc.at("picard");
    if (!c.is_object()) throw InvalidArgument("'picard' must be an object");
    fallback.iterations = count_or(c, "P", fallback.iterations);
    fallback.regression_paths = count_or(c, "lambda_reg", fallback.regression_paths);
    if (c.contains("crn")) {
      if (!c.at("crn").is_boolean()) throw InvalidArgument("'picard.crn' must be a boolean");
      fallback.crn = c.at("crn").get<bool>();
    }
    if (c.contains("init")) fallback.initial_alpha = number_or(c, "init", 0.0);
  }
  fallback.check();
  return fallback;
}

json policy_to_json(const DecoupledPolicy& policy, const TimeGrid& grid) {
  return {{"alpha", policy.alpha},
          {"beta", policy.beta},
          {"basis", {{"x_min", policy.basis.x_min}, {"x_max", policy.basis.x_max}, {"K", policy.basis.K}}},
          {"c_g", policy.c_g},
          {"grid", {{"T", grid.horizon()}, {"N", grid.steps()}}}};
}

DecoupledPolicy policy_from_json(const json& doc, TimeGrid& grid) {
  if (!doc.is_object()) throw InvalidArgument("policy document must be a JSON object");
  DecoupledPolicy policy;
  policy.basis = basis_from_json(doc, BasisSpec{});
  policy.alpha = weight_rows(doc, "alpha");
  policy.beta = weight_rows(doc, "beta");
  policy.c_g = number_or(doc, "c_g", LQParams{}.c_g);
  policy.check();
  double T = 1.0;
  if (doc.contains("grid")) T = number_or(doc.at("grid"), "T", T);
  grid = TimeGrid(T, policy.steps());
  return policy;
}

json report_to_json(const EstimatorReport& r) {
  return {{"init_term", r.init_term},
          {"terminal_term", r.terminal_term},
          {"fwd_max", r.fwd_max},
          {"bwd_max", r.bwd_max},
          {"martingale_term", r.martingale_term},
          {"total", r.total},
          {"fwd_profile", r.fwd_profile},
          {"bwd_profile", r.bwd_profile}};
}

json shooting_to_json(const ShootingResult& result) {
  return {{"y0", result.theta.y0},
          {"z", result.theta.z},
          {"terminal_loss", result.terminal_loss},
          {"regularized", result.regularized}};
}

}  // namespace mvfbsde

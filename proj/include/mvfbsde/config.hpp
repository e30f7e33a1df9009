#pragma once

// JSON configuration and document formats used by the command-line tool.
//
// Model parameters are a flat object {x0, T, c_alpha, sigma, c_x, h_bar, c_g};
// missing keys keep the benchmark defaults. Optional nested objects
// "basis" {x_min, x_max, K} and "picard" {P, lambda_reg, crn, init}.

#include <string>

#include <json.hpp>

#include "mvfbsde/basis.hpp"
#include "mvfbsde/estimator.hpp"
#include "mvfbsde/picard.hpp"
#include "mvfbsde/shooting.hpp"

namespace mvfbsde {

nlohmann::json load_json_file(const std::string& path);

LQParams params_from_json(const nlohmann::json& doc);
nlohmann::json params_to_json(const LQParams& p);

/// Reads doc["basis"] on top of `fallback`.
BasisSpec basis_from_json(const nlohmann::json& doc, BasisSpec fallback);
/// Reads doc["picard"] on top of `fallback`.
PicardConfig picard_from_json(const nlohmann::json& doc, PicardConfig fallback);

/// {alpha: [[...]], beta: [[...]], basis: {...}, c_g, grid: {T, N}}
nlohmann::json policy_to_json(const DecoupledPolicy& policy, const TimeGrid& grid);
/// Parses a policy document; the grid is returned through `grid`.
DecoupledPolicy policy_from_json(const nlohmann::json& doc, TimeGrid& grid);

nlohmann::json report_to_json(const EstimatorReport& report);
nlohmann::json shooting_to_json(const ShootingResult& result);

}  // namespace mvfbsde

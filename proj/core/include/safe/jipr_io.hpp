#pragma once

#include <nlohmann/json.hpp>

#include "safe/jipr.hpp"

// JSON layout (all floats decimal, matrices row-major):
//
//   DiscreteModel:
//     {"outcome_count": M,
//      "null_grid":        {"params": [[...], ...], "rows": [[p_0..p_{M-1}], ...]},
//      "alt_grid":         {...same...},
//      "certificate_grid": {...same, optional...}}
//
//   JiprSolution:
//     {"w0_star": {"indices": [...], "weights": [...]},
//      "w1_star": {...},
//      "kl_value": x,
//      "certificate": {"max_null_mean": x, "min_boundary_growth": x, "duality_gap": x},
//      "iterations": k}
//
// w0_star indices address null_grid rows followed by certificate_grid rows.
namespace safe {

void to_json(nlohmann::json& j, const ParameterGrid& grid);
void from_json(const nlohmann::json& j, ParameterGrid& grid);
void to_json(nlohmann::json& j, const DiscreteModel& model);
void from_json(const nlohmann::json& j, DiscreteModel& model);
void to_json(nlohmann::json& j, const FiniteSupportPrior& prior);
void from_json(const nlohmann::json& j, FiniteSupportPrior& prior);
void to_json(nlohmann::json& j, const JiprCertificate& certificate);
void from_json(const nlohmann::json& j, JiprCertificate& certificate);
void to_json(nlohmann::json& j, const JiprSolution& solution);
void from_json(const nlohmann::json& j, JiprSolution& solution);

}  // namespace safe

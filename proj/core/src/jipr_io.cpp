#include "safe/jipr_io.hpp"

namespace safe {

void to_json(nlohmann::json& j, const ParameterGrid& grid) {
  j = nlohmann::json{{"params", grid.params}, {"rows", grid.rows}};
}

void from_json(const nlohmann::json& j, ParameterGrid& grid) {
  grid.params = j.value("params", std::vector<std::vector<double>>{});
  j.at("rows").get_to(grid.rows);
}

void to_json(nlohmann::json& j, const DiscreteModel& model) {
  j = nlohmann::json{{"outcome_count", model.outcome_count},
                     {"null_grid", model.null_grid},
                     {"alt_grid", model.alt_grid}};
  if (!model.certificate_grid.empty()) j["certificate_grid"] = model.certificate_grid;
}

void from_json(const nlohmann::json& j, DiscreteModel& model) {
  j.at("outcome_count").get_to(model.outcome_count);
  j.at("null_grid").get_to(model.null_grid);
  j.at("alt_grid").get_to(model.alt_grid);
  model.certificate_grid = j.contains("certificate_grid") ? j.at("certificate_grid").get<ParameterGrid>()
                                                          : ParameterGrid{};
}

void to_json(nlohmann::json& j, const FiniteSupportPrior& prior) {
  j = nlohmann::json{{"indices", prior.indices}, {"weights", prior.weights}};
}

void from_json(const nlohmann::json& j, FiniteSupportPrior& prior) {
  j.at("indices").get_to(prior.indices);
  j.at("weights").get_to(prior.weights);
}

void to_json(nlohmann::json& j, const JiprCertificate& certificate) {
  j = nlohmann::json{{"max_null_mean", certificate.max_null_mean},
                     {"min_boundary_growth", certificate.min_boundary_growth},
                     {"duality_gap", certificate.duality_gap}};
}

void from_json(const nlohmann::json& j, JiprCertificate& certificate) {
  j.at("max_null_mean").get_to(certificate.max_null_mean);
  j.at("min_boundary_growth").get_to(certificate.min_boundary_growth);
  j.at("duality_gap").get_to(certificate.duality_gap);
}

void to_json(nlohmann::json& j, const JiprSolution& solution) {
  j = nlohmann::json{{"w0_star", solution.w0_star},
                     {"w1_star", solution.w1_star},
                     {"kl_value", solution.kl_value},
                     {"certificate", solution.certificate},
                     {"iterations", solution.iterations}};
}

void from_json(const nlohmann::json& j, JiprSolution& solution) {
  j.at("w0_star").get_to(solution.w0_star);
  j.at("w1_star").get_to(solution.w1_star);
  j.at("kl_value").get_to(solution.kl_value);
  j.at("certificate").get_to(solution.certificate);
  solution.iterations = j.value("iterations", std::size_t{0});
}

}  // namespace safe

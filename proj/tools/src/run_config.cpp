#include "safe_cli/run_config.hpp"

#include <stdexcept>

namespace safe::cli {

double RunConfig::parameter(const std::string& key, double fallback) const {
  const auto it = parameters.find(key);
  return it == parameters.end() ? fallback : it->second;
}

std::string RunConfig::option(const std::string& key, const std::string& fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

void to_json(nlohmann::json& j, const RunConfig& config) {
  j = nlohmann::json{{"subcommand", config.subcommand}, {"scenario", config.scenario},
                     {"parameters", config.parameters}, {"options", config.options},
                     {"output", config.output},         {"format", config.format},
                     {"seed", config.seed},             {"tolerances", config.tolerances}};
}

void from_json(const nlohmann::json& j, RunConfig& config) {
  RunConfig c;
  c.subcommand = j.value("subcommand", c.subcommand);
  c.scenario = j.at("scenario").get<std::string>();
  c.parameters = j.value("parameters", c.parameters);
  c.options = j.value("options", c.options);
  c.output = j.value("output", c.output);
  c.format = j.value("format", c.format);
  c.seed = j.value("seed", c.seed);
  c.tolerances = j.value("tolerances", c.tolerances);
  if (c.format != "csv" && c.format != "json") {
    throw std::invalid_argument("format must be csv or json, got '" + c.format + "'");
  }
  config = std::move(c);
}

}  // namespace safe::cli

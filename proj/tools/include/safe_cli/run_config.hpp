#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace safe::cli {

/// A complete, replayable description of one `simulate` run.
struct RunConfig {
  std::string subcommand = "simulate";
  std::string scenario = "type1-aggressive";
  std::map<std::string, double> parameters;
  std::map<std::string, std::string> options;
  std::string output;  ///< empty writes to stdout
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::map<std::string, double> tolerances;

  double parameter(const std::string& key, double fallback) const;
  std::string option(const std::string& key, const std::string& fallback) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void to_json(nlohmann::json& j, const RunConfig& config);
/// Throws nlohmann::json::exception or std::invalid_argument on malformed input.
void from_json(const nlohmann::json& j, RunConfig& config);

}  // namespace safe::cli

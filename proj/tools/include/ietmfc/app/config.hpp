#pragma once

#include "ietmfc/model.hpp"
#include "ietmfc/population.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace ietmfc::app {

/// Raised for anything wrong with a configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  bool predictions = true;  // predictions.csv and the prediction chart
  bool charts = true;       // SVG files
};

/// One document fully determines a run.
struct RunConfig {
  Scenario scenario;
  Regime regime = Regime::erroneous;
  OutputOptions outputs;
};

/// Matrices are arrays of rows, vectors plain arrays; a bare number is
/// accepted wherever a 1x1 matrix or length-1 vector is expected.
nlohmann::json to_json(const RunConfig& config);

/// Missing fields fall back to reference_scenario(). Throws ConfigError on
/// malformed input; does not run validate().
RunConfig config_from_json(const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// Reference scenario wrapped as a config.
RunConfig default_config();

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string scenario_hash(const RunConfig& config);

}  // namespace ietmfc::app

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "lloss/experiment.hpp"

namespace lloss::cli {

/// Malformed or unreadable configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Strict parse: unknown keys and wrong types are errors. Missing keys take
/// their defaults. Does not check cross-field constraints; see violations().
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full snapshot with every default spelled out; parse_config round-trips it.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace lloss::cli

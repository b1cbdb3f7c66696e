#pragma once

// Scenario files are YAML mappings; docs/report_schema.md lists every key.
//
//   protocol: three_stage_auth
//   seed: 42
//   message: "10110"
//   adversary:
//     kind: mitm
//   auth:
//     window_millis: 30000
//
// Precedence, lowest first: built-in defaults, the file, then each
// "dotted.key=value" override in order.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkdsim/harness.hpp"

namespace qkdsim::io {

inline constexpr const char* kConfigDirEnv = "QKDSIM_CONFIG_DIR";

class ConfigFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every recognised dotted key.
const std::vector<std::string>& config_keys();

// Throws harness::ConfigError listing every problem (unknown keys, bad
// values, malformed overrides, failed validation).
harness::ScenarioConfig parse_scenario(const std::string& yaml_text, const std::vector<std::string>& overrides = {});

// Uses `path` when it exists, otherwise looks it up (with and without a
// .yaml suffix) under $QKDSIM_CONFIG_DIR. Throws ConfigFileError naming the
// path when nothing readable is found.
std::filesystem::path resolve_config_path(const std::string& path);

harness::ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

// Canonical YAML for a config, suitable for feeding back to parse_scenario.
std::string scenario_yaml(const harness::ScenarioConfig& config);

}  // namespace qkdsim::io

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "cyclic_swarm/core.hpp"

namespace cyclic_swarm {

// Field names follow ScenarioConfig; see schema/scenario.schema.json.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);

/// Throws IoError if the file cannot be read, ConfigError on bad content.
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace cyclic_swarm

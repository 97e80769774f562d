#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "mixsdde/experiments.hpp"

namespace mixsdde::config {

using Json = nlohmann::ordered_json;

// Everything a config file describes. `experiment` is present only when the
// file has an "experiment" section.
struct LoadedConfig {
    std::uint64_t seed = 0;
    exp::ModelConfig model;
    std::optional<exp::ExperimentConfig> experiment;
};

// Strict parse: unknown keys, wrong types and missing required fields throw
// ParseError; values violating a constraint throw ConstraintError.
LoadedConfig parse_config(const Json& j);
LoadedConfig parse_config_text(const std::string& text);
LoadedConfig load_config(const std::filesystem::path& path);

// Canonical form with every default filled in; parse_config(to_json(c)) == c.
Json to_json(const LoadedConfig& cfg);

Json to_json(const CoefficientSpec& spec);
CoefficientSpec coefficients_from_json(const Json& j);

}  // namespace mixsdde::config

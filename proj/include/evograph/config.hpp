#pragma once

#include "evograph/engine.hpp"
#include "evograph/simenv.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evograph {

/// Section-qualified keys ("engine.T") mapped to their textual values.
using FlatConfig = std::map<std::string, std::string, std::less<>>;

struct RunConfig {
    EngineConfig engine;
    std::string estate_preset = "reference";
    std::uint64_t estate_seed = 42;
    EstateSpec estate;
    std::string output_dir = "out";
};

/// Reads an INI-style file, or JSON when the content starts with '{'.
/// Throws InvalidConfig naming the file.
FlatConfig read_config_file(const std::string& path);
FlatConfig parse_ini(std::string_view text);
FlatConfig parse_json_config(std::string_view text);

/// Applies "key=value" on top of `flat`. Throws InvalidConfig.
void apply_override(FlatConfig& flat, std::string_view assignment);

/// Builds and validates a run configuration. Estate keys are applied on top
/// of the chosen preset; the estate seed defaults to the engine seed.
/// Throws InvalidConfig (with the key path) for unknown keys, bad values and
/// cross-field violations, and UnknownEventKind / OutOfRangeEvent for
/// events.
RunConfig build_config(const FlatConfig& flat);

/// Every effective setting, one "key = value" per line under [section]
/// headers. Feeding it back through parse_ini reproduces the same config.
std::string effective_config(const RunConfig& config);

}  // namespace evograph

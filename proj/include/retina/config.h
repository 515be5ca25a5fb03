#pragma once

// Experiment configuration files.
//
// A flat key-value format with sections:
//
//   # comment
//   [market]
//   cycles = 30
//   scenario = "75-25"
//   [broker]
//   buyer_reserve = [20, 40]
//
// Values are numbers, booleans, double-quoted strings or two-element
// [lo, hi] ranges. Keys are addressed as section.key, which is also the form
// accepted by overrides ("market.cycles=10").

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "retina/simulation.h"

namespace retina::config {

/// Applies every assignment in `text` on top of `base`. Throws ConfigInvalid
/// with a "line N:" prefix on the first bad line.
sim::SimConfig parse_config(std::string_view text, sim::SimConfig base = {});

/// Reads and parses a file; a missing file is ConfigInvalid naming the path.
sim::SimConfig load_config_file(const std::string& path, sim::SimConfig base = {});

/// "section.key=value". Throws ConfigInvalid.
void apply_override(sim::SimConfig& config, std::string_view assignment);

/// Inverse of sim::to_json(SimConfig). Throws ConfigInvalid.
sim::SimConfig config_from_json(const nlohmann::json& j);

/// Every accepted section.key, sorted.
std::vector<std::string> known_keys();

}  // namespace retina::config

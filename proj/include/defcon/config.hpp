#pragma once

// Experiment config: flat `key = value` text with `[section]` headers.
// Keys are addressed as `section.key` (e.g. `control.K2`); `#` starts a
// comment. Every field of SimConfig has exactly one key.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "defcon/sim.hpp"

namespace defcon {

/// Parses `text` (named `source` in error messages), applies `overrides`
/// (each `key=value`), and validates the result. Throws ConfigError.
SimConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {},
                       const std::string& source = "<config>");

SimConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

/// Applies one `key=value` override without validating. `key` may be the
/// full `section.key` or any suffix that names exactly one key.
void apply_override(SimConfig& config, std::string_view assignment);

/// Every accepted key, in file order.
std::vector<std::string> config_keys();

/// Resolves a possibly abbreviated key; throws ConfigError if unknown or
/// ambiguous.
std::string resolve_key(std::string_view key);

}  // namespace defcon

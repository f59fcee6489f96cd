#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ehaoi/model.hpp"

namespace ehaoi {

/// `key=value` override applied before parsing; the key is a dotted path
/// into the config document (e.g. `recovery.p_rec`, `harvester.powers.1`),
/// the value any JSON literal.
using ConfigOverride = std::pair<std::string, std::string>;

ConfigOverride parse_override(const std::string& text);

/// Parses the JSON config document. A field left `null` is a required
/// placeholder and must be filled by an override. Throws ConfigError listing
/// every missing or mistyped field.
SystemConfig parse_config(const std::string& text, const std::vector<ConfigOverride>& overrides = {});

SystemConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides = {});

/// Canonical JSON text (sorted keys, fixed layout).
std::string dump_config(const SystemConfig& cfg);

/// 64-bit FNV-1a of dump_config, as 16 hex digits.
std::string config_hash(const SystemConfig& cfg);

}  // namespace ehaoi

#pragma once

#include <stdexcept>
#include <string>

#include "cpr/evolution.hpp"

namespace cpr {

// Thrown on schema or invariant violations; message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses and validates a system config from the documented JSON schema.
SystemConfig parse_config_file(const std::string& path);
SystemConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// Canonical JSON form; parse_config_text(serialize_config(c)) reproduces c.
std::string serialize_config(const SystemConfig& config);

// Stable FNV-1a hash of the canonical form, as 16 hex digits.
std::string config_digest(const SystemConfig& config);

}  // namespace cpr

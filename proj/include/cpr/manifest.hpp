#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace cpr {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record embedded in every output file. Outputs are a pure
/// function of the manifest; CPR_TIMESTAMP overrides the wall clock for
/// byte-reproducible runs.
struct RunManifest {
  std::string config_path;
  std::string config_digest;
  std::string subcommand;
  std::map<std::string, std::string> parameters;  // flags, tolerances, seed
  std::string tool_version = kToolVersion;
  std::string timestamp;

  static std::string now_iso8601();  // honors CPR_TIMESTAMP
  std::string to_json() const;
  // Single-line form prefixed with '#', placed above CSV headers.
  std::string to_csv_comment() const;
};

}  // namespace cpr

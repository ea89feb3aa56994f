#include "cpr/manifest.hpp"

#include <cstdlib>
#include <ctime>

#include "json.hpp"

namespace cpr {

std::string RunManifest::now_iso8601() {
  if (const char* fixed = std::getenv("CPR_TIMESTAMP")) return fixed;
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j{{"config_path", config_path},
                   {"config_digest", config_digest},
                   {"subcommand", subcommand},
                   {"parameters", parameters},
                   {"tool_version", tool_version},
                   {"timestamp", timestamp}};
  return j.dump();
}

std::string RunManifest::to_csv_comment() const { return "# manifest " + to_json(); }

}  // namespace cpr

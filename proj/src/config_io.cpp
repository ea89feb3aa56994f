#include "cpr/config_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cpr {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

DegreeDistribution parse_dist(const json& j, const std::string& where) {
  if (!j.is_object() || j.empty())
    fail(where, "degree_distribution must be a non-empty map from degree to weight");
  std::vector<double> coeffs;
  for (const auto& [key, value] : j.items()) {
    int degree = -1;
    try {
      std::size_t pos = 0;
      degree = std::stoi(key, &pos);
      if (pos != key.size()) degree = -1;
    } catch (const std::exception&) {
      degree = -1;
    }
    if (degree < 0) fail(where, "degree key '" + key + "' is not a nonnegative integer");
    if (!value.is_number()) fail(where, "weight of degree " + key + " is not a number");
    if (static_cast<std::size_t>(degree) >= coeffs.size()) coeffs.resize(degree + 1, 0.0);
    coeffs[degree] = value.get<double>();
  }
  try {
    return DegreeDistribution::from_coeffs(std::move(coeffs));
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

ReceiverModel parse_model(const json& j, int num_classes, const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    fail(where, "model must be an object with a 'kind' field");
  const std::string kind = j.at("kind").get<std::string>();
  const auto get_num = [&](const char* field) {
    if (!j.contains(field) || !j.at(field).is_number())
      fail(where, std::string("model kind '") + kind + "' needs numeric field '" + field + "'");
    return j.at(field).get<double>();
  };
  try {
    if (kind == "slotted_aloha") return ReceiverModel::slotted_aloha(num_classes);
    if (kind == "d_fold")
      return ReceiverModel::d_fold(static_cast<int>(get_num("d")), num_classes);
    if (kind == "d_fold_errors")
      return ReceiverModel::d_fold_with_errors(static_cast<int>(get_num("d")),
                                               get_num("p_err"), num_classes);
    if (kind == "cooperative_sa") {
      if (num_classes != 2) fail(where, "cooperative_sa serves exactly 2 user classes");
      return ReceiverModel::cooperative_sa();
    }
    if (kind == "rayleigh")
      return ReceiverModel::rayleigh_capture(get_num("gamma_db"), get_num("b_db"), num_classes);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  fail(where, "unknown receiver kind '" + kind + "'");
}

}  // namespace

SystemConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) fail(origin, "top level must be an object");
  if (!j.contains("user_classes") || !j.at("user_classes").is_array() ||
      j.at("user_classes").empty())
    fail(origin, "'user_classes' must be a non-empty array");
  if (!j.contains("receiver_classes") || !j.at("receiver_classes").is_array() ||
      j.at("receiver_classes").empty())
    fail(origin, "'receiver_classes' must be a non-empty array");

  const int K = static_cast<int>(j.at("user_classes").size());
  const int J = static_cast<int>(j.at("receiver_classes").size());

  std::vector<DegreeDistribution> dists;
  std::vector<std::vector<double>> routing;
  for (int k = 0; k < K; ++k) {
    const std::string where = origin + ": user_classes[" + std::to_string(k) + "]";
    const auto& uc = j.at("user_classes").at(k);
    if (!uc.is_object() || !uc.contains("degree_distribution") || !uc.contains("routing"))
      fail(where, "needs 'degree_distribution' and 'routing'");
    dists.push_back(parse_dist(uc.at("degree_distribution"), where + ".degree_distribution"));
    const auto& row = uc.at("routing");
    if (!row.is_array() || static_cast<int>(row.size()) != J)
      fail(where + ".routing", "needs one entry per receiver class (" + std::to_string(J) + ")");
    routing.push_back(row.get<std::vector<double>>());
  }

  std::vector<ReceiverModel> models;
  std::vector<double> fractions;
  for (int jj = 0; jj < J; ++jj) {
    const std::string where = origin + ": receiver_classes[" + std::to_string(jj) + "]";
    const auto& rc = j.at("receiver_classes").at(jj);
    if (!rc.is_object() || !rc.contains("fraction") || !rc.contains("model"))
      fail(where, "needs 'fraction' and 'model'");
    fractions.push_back(rc.at("fraction").get<double>());
    models.push_back(parse_model(rc.at("model"), K, where + ".model"));
  }

  const double p_sic = j.value("p_sic", 0.0);
  const double p_era = j.value("p_era", 0.0);
  for (const auto& [key, _] : j.items())
    if (key != "user_classes" && key != "receiver_classes" && key != "p_sic" && key != "p_era")
      fail(origin, "unknown field '" + key + "'");

  try {
    return make_system_config(std::move(dists), std::move(models), std::move(fractions),
                              std::move(routing), p_sic, p_era);
  } catch (const std::exception& e) {
    fail(origin, e.what());
  }
}

SystemConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string serialize_config(const SystemConfig& config) {
  json j;
  j["user_classes"] = json::array();
  for (int k = 0; k < config.num_user_classes; ++k) {
    json dist = json::object();
    const auto& c = config.dists[k].coeffs();
    for (std::size_t l = 0; l < c.size(); ++l)
      if (c[l] != 0.0) dist[std::to_string(l)] = c[l];
    j["user_classes"].push_back({{"degree_distribution", dist},
                                 {"routing", config.routing[k]}});
  }
  j["receiver_classes"] = json::array();
  for (int jj = 0; jj < config.num_receiver_classes; ++jj) {
    const auto& m = config.models[jj];
    json model{{"kind", to_string(m.kind())}};
    switch (m.kind()) {
      case ReceiverKind::SlottedAloha:
      case ReceiverKind::CooperativeSA:
        break;
      case ReceiverKind::DFold:
        model["d"] = m.d();
        break;
      case ReceiverKind::DFoldWithErrors:
        model["d"] = m.d();
        model["p_err"] = m.p_err();
        break;
      case ReceiverKind::RayleighCapture:
        model["gamma_db"] = m.gamma_db();
        model["b_db"] = m.b_db();
        break;
    }
    j["receiver_classes"].push_back(
        {{"fraction", config.receiver_fractions[jj]}, {"model", model}});
  }
  j["p_sic"] = config.p_sic;
  j["p_era"] = config.p_era;
  return j.dump(2) + "\n";
}

std::string config_digest(const SystemConfig& config) {
  const std::string canon = serialize_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cpr

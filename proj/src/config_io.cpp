#include "ehaoi/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "json.hpp"

namespace ehaoi {

using nlohmann::json;

namespace {

class Reader {
 public:
  template <typename T>
  T get(const json& node, const std::string& key, const std::string& path) {
    if (!node.is_object() || !node.contains(key)) {
      report(path + " is missing");
      return T{};
    }
    const json& v = node.at(key);
    if (v.is_null()) {
      report(path + " is a required placeholder; set it with an override");
      return T{};
    }
    if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) {
        report(path + " must be an integer");
        return T{};
      }
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      report(path + " has the wrong type");
      return T{};
    }
  }

  const json& child(const json& node, const std::string& key, const std::string& path) {
    static const json kNull;
    if (!node.is_object() || !node.contains(key) || node.at(key).is_null()) {
      report(path + " is missing");
      return kNull;
    }
    return node.at(key);
  }

  void report(std::string msg) { violations_.push_back({ErrorKind::kConfigParse, std::move(msg)}); }
  std::vector<Violation> take() { return std::move(violations_); }

 private:
  std::vector<Violation> violations_;
};

json::json_pointer pointer_for(const std::string& dotted) {
  std::string ptr;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto dot = dotted.find('.', start);
    ptr += "/" + dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return json::json_pointer(ptr);
}

}  // namespace

ConfigOverride parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({{ErrorKind::kConfigParse, "override `" + text + "` is not key=value"}});
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

SystemConfig parse_config(const std::string& text, const std::vector<ConfigOverride>& overrides) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({{ErrorKind::kConfigParse, e.what()}});
  }
  for (const auto& [key, value] : overrides) {
    try {
      doc[pointer_for(key)] = json::parse(value);
    } catch (const json::exception& e) {
      throw ConfigError({{ErrorKind::kConfigParse, "override " + key + ": " + e.what()}});
    }
  }

  Reader rd;
  SystemConfig cfg;
  cfg.b_max = rd.get<int>(doc, "b_max", "b_max");
  cfg.a_max = rd.get<int>(doc, "a_max", "a_max");

  const json& modes = rd.child(doc, "modes", "modes");
  if (modes.is_array()) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::string p = "modes." + std::to_string(i);
      cfg.modes.push_back({rd.get<int>(modes[i], "power", p + ".power"),
                           rd.get<double>(modes[i], "error_prob", p + ".error_prob")});
    }
  }

  const json& h = rd.child(doc, "harvester", "harvester");
  if (h.is_object()) {
    cfg.harvester.transition = rd.get<std::vector<std::vector<double>>>(h, "matrix", "harvester.matrix");
    const json& powers = rd.child(h, "powers", "harvester.powers");
    if (powers.is_array()) {
      for (std::size_t i = 0; i < powers.size(); ++i) {
        const std::string p = "harvester.powers." + std::to_string(i);
        if (powers[i].is_null()) {
          rd.report(p + " is a required placeholder; set it with an override");
        } else if (!powers[i].is_number_integer()) {
          rd.report(p + " has the wrong type");
        }
        cfg.harvester.power.push_back(powers[i].is_number_integer() ? powers[i].get<int>() : 0);
      }
    }
  }

  const json& rec = rd.child(doc, "recovery", "recovery");
  if (rec.is_object()) {
    cfg.recovery.n_rec = rd.get<int>(rec, "n_rec", "recovery.n_rec");
    cfg.recovery.p_rec = rd.get<double>(rec, "p_rec", "recovery.p_rec");
  }

  auto violations = rd.take();
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return cfg;
}

SystemConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{ErrorKind::kConfigParse, "cannot open config file " + path}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string dump_config(const SystemConfig& cfg) {
  json doc;
  doc["b_max"] = cfg.b_max;
  doc["a_max"] = cfg.a_max;
  doc["modes"] = json::array();
  for (const auto& m : cfg.modes) doc["modes"].push_back({{"power", m.power}, {"error_prob", m.error_prob}});
  doc["harvester"] = {{"matrix", cfg.harvester.transition}, {"powers", cfg.harvester.power}};
  doc["recovery"] = {{"n_rec", cfg.recovery.n_rec}, {"p_rec", cfg.recovery.p_rec}};
  return doc.dump(2);
}

std::string config_hash(const SystemConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ehaoi

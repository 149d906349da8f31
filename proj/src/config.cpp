#include "percept/config.hpp"

#include <fstream>
#include <sstream>

#include "percept/errors.hpp"

namespace percept {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        " has no '=': " + stripped);
    }
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[key] = trim(stripped.substr(eq + 1));
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config key missing: " + key);
  return it->second;
}

std::string Config::get_or(const std::string& key,
                           const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t Config::get_int(const std::string& key,
                             std::int64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoll(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean");
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

BackboneConfig Config::backbone_config() const {
  BackboneConfig bc;
  bc.checkpoint_path = get("checkpoint");
  bc.vocab_path = get("vocab");
  bc.model_card_path = get_or("model_card", "");
  bc.variant = variant_from_string(get_or("variant", "residual-attnpool"));
  bc.pos_embedding_mode =
      pos_mode_from_string(get_or("pos_embedding_mode", "removed"));
  bc.native_input_size =
      static_cast<int>(get_int("native_input_size", 224));
  bc.max_pixels = get_int("max_pixels", bc.max_pixels);
  return bc;
}

}  // namespace percept

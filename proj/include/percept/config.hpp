#pragma once

#include <map>
#include <optional>
#include <string>

#include "percept/backbone_config.hpp"

namespace percept {

// Key-value text configuration ("key = value" lines, # comments).
class Config {
 public:
  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // ConfigError if missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  // Keys: checkpoint, vocab, model_card, variant, pos_embedding_mode,
  // native_input_size, max_pixels.
  BackboneConfig backbone_config() const;

  std::string cache_dir() const { return get_or("cache_dir", ""); }
  int workers() const { return static_cast<int>(get_int("workers", 1)); }
  bool deterministic() const { return get_bool("deterministic", true); }
  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(get_int("seed", 0));
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace percept

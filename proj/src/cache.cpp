#include "percept/cache.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "percept/errors.hpp"
#include "percept/sha256.hpp"

namespace percept {

namespace fs = std::filesystem;
using nlohmann::json;

ScoreCache::ScoreCache(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

std::string ScoreCache::make_key(const std::string& image_bytes_sha,
                                 const std::string& prompt_or_context_id,
                                 const std::string& encoder_fingerprint,
                                 const std::string& preprocess_tag) {
  return sha256_hex(image_bytes_sha + "\x1f" + prompt_or_context_id + "\x1f" +
                    encoder_fingerprint + "\x1f" + preprocess_tag);
}

std::string ScoreCache::entry_path(const std::string& key) const {
  return (fs::path(dir_) / key.substr(0, 2) / (key + ".json")).string();
}

std::optional<CachedScore> ScoreCache::get(const std::string& key) const {
  if (!enabled()) return std::nullopt;
  const std::string path = entry_path(key);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
    CachedScore v;
    v.s1 = j.at("s1").get<double>();
    v.s2 = j.at("s2").get<double>();
    v.score = j.at("score").get<double>();
    const std::string recorded = j.at("key").get<std::string>();
    if (recorded != key) {
      throw StaleCacheError(
          "cache entry " + path + " was written under a different fingerprint; "
          "purge the cache directory (" + dir_ + ") and re-run");
    }
    return v;
  } catch (const json::exception&) {
    throw StaleCacheError("cache entry " + path +
                          " is unreadable; purge the cache directory (" + dir_ +
                          ") and re-run");
  }
}

void ScoreCache::put(const std::string& key, const CachedScore& value) const {
  if (!enabled()) return;
  const fs::path path = entry_path(key);
  fs::create_directories(path.parent_path());
  json j;
  j["key"] = key;
  j["s1"] = value.s1;
  j["s2"] = value.s2;
  j["score"] = value.score;
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp);
    if (!out) throw AssetError("cannot write cache entry: " + tmp.string());
    out << j.dump();
  }
  fs::rename(tmp, path);
}

}  // namespace percept

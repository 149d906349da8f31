#pragma once

#include <optional>
#include <string>

namespace percept {

struct CachedScore {
  double s1 = 0.0;
  double s2 = 0.0;
  double score = 0.0;
};

// Content-addressed score store: one small json file per key under
// dir/<first two hex chars>/<key>.json, written via temp file + atomic
// rename so concurrent writers of the same key are safe. The fingerprint is
// stored inside each entry as well; a mismatch on read raises
// StaleCacheError with purge instructions.
class ScoreCache {
 public:
  // Empty dir disables the cache (get misses, put is a no-op).
  explicit ScoreCache(std::string dir);

  bool enabled() const { return !dir_.empty(); }

  static std::string make_key(const std::string& image_bytes_sha,
                              const std::string& prompt_or_context_id,
                              const std::string& encoder_fingerprint,
                              const std::string& preprocess_tag);

  std::optional<CachedScore> get(const std::string& key) const;
  void put(const std::string& key, const CachedScore& value) const;

 private:
  std::string entry_path(const std::string& key) const;
  std::string dir_;
};

}  // namespace percept

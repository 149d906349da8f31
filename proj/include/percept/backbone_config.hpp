#pragma once

#include <cstdint>
#include <string>

namespace percept {

enum class BackboneVariant { ResidualAttnPool, PatchTransformer };
enum class PosEmbeddingMode { Removed, Vanilla, Interpolated };

BackboneVariant variant_from_string(const std::string& name);
PosEmbeddingMode pos_mode_from_string(const std::string& name);
std::string to_string(BackboneVariant v);
std::string to_string(PosEmbeddingMode m);

struct BackboneConfig {
  BackboneVariant variant = BackboneVariant::ResidualAttnPool;
  PosEmbeddingMode pos_embedding_mode = PosEmbeddingMode::Removed;
  int native_input_size = 224;
  std::string checkpoint_path;
  std::string vocab_path;
  std::string model_card_path;  // sidecar json with normalization etc.
  // Memory cap for arbitrary-resolution modes; inputs beyond it are refused
  // with an explicit error rather than silently resized.
  std::int64_t max_pixels = 16 * 1024 * 1024;
};

}  // namespace percept

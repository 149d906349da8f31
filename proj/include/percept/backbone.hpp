#pragma once

#include <memory>
#include <optional>

#include "percept/backbone_config.hpp"
#include "percept/encoder.hpp"
#include "percept/tensor_archive.hpp"
#include "percept/text_transformer.hpp"
#include "percept/tokenizer.hpp"
#include "percept/vision_resnet.hpp"
#include "percept/vision_vit.hpp"

namespace percept {

// Sidecar json next to a converted checkpoint: normalization constants and
// architecture facts that are not derivable from tensor shapes.
struct ModelCard {
  Eigen::Vector3f image_mean{0.0f, 0.0f, 0.0f};
  Eigen::Vector3f image_std{1.0f, 1.0f, 1.0f};
  int native_input_size = 224;
  int context_length = 77;
  std::string variant = "residual-attnpool";
  int text_heads = 0;    // 0 = width/64
  int vision_heads = 0;  // 0 = width/64
  // Optional self-check data written by the converter: prompt -> token ids
  // from the reference tokenizer.
  std::map<std::string, std::vector<std::int32_t>> probe_tokens;

  static ModelCard load(const std::string& path);
};

// In-place positional-embedding surgery on a converted checkpoint.
//   Removed: the positional tensors are dropped; pooling runs without any
//            positional term, freeing the input size.
//   Vanilla: weights unchanged (inputs must then match the native size).
//   Interpolated: weights unchanged here; the grid is bilinearly resampled
//                 to the input's grid at embed time.
void apply_positional_surgery(TensorArchive& weights, PosEmbeddingMode mode);

// A frozen vision-language checkpoint with tokenizer, ready to embed.
// Immutable after load; concurrent embed calls are safe.
class Backbone : public Encoder {
 public:
  static Backbone load(const BackboneConfig& config);

  int dim() const override;
  Embedding embed_image(const ImageBuffer& image) const override;
  Embedding embed_text(const std::string& text) const override;
  std::string fingerprint() const override;

  Embedding embed_tokens(const TokenSequence& tokens) const;
  TokenSequence tokenize(const std::string& text) const;

  const BpeTokenizer& tokenizer() const { return *tokenizer_; }
  const TextTransformer& text_transformer() const { return *text_; }
  const BackboneConfig& config() const { return config_; }
  const ModelCard& model_card() const { return card_; }

  // Set when the variant/mode combination is known to degrade accuracy
  // (patch transformer with the positional term removed).
  bool degraded_accuracy_flag() const { return degraded_accuracy_; }

  // Digest over every weight tensor; constant across embed calls.
  std::string weights_digest() const;

 private:
  Backbone() = default;

  BackboneConfig config_;
  ModelCard card_;
  std::shared_ptr<const BpeTokenizer> tokenizer_;
  std::shared_ptr<const TextTransformer> text_;
  std::shared_ptr<const vision::ResNetVisionEncoder> resnet_;
  std::shared_ptr<const vision::ViTVisionEncoder> vit_;
  std::string checkpoint_sha_;
  bool degraded_accuracy_ = false;
};

}  // namespace percept

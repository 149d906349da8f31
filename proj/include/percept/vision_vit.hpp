#pragma once

#include <vector>

#include "percept/backbone_config.hpp"
#include "percept/sha256.hpp"
#include "percept/vision_common.hpp"

namespace percept::vision {

// The patch-transformer image encoder: patch-embedding convolution, class
// token, pre/post layer norms around unmasked residual attention blocks,
// and a final linear projection into the shared space.
class ViTVisionEncoder {
 public:
  static ViTVisionEncoder from_archive(const TensorArchive& archive,
                                       PosEmbeddingMode mode,
                                       int native_input_size, int heads);

  Eigen::VectorXf encode(const FeatureMap& image) const;

  int output_dim() const { return static_cast<int>(proj_.cols()); }
  int patch_size() const { return patch_conv_.kh; }
  int native_grid() const { return native_grid_; }
  void fold_weights(Sha256& hasher) const;

 private:
  struct Block {
    nn::LayerNormParams<float> ln1, ln2;
    nn::MatX<float> attn_in_w;
    nn::VecX<float> attn_in_b;
    nn::MatX<float> attn_out_w;
    nn::VecX<float> attn_out_b;
    nn::MatX<float> fc_w;
    nn::VecX<float> fc_b;
    nn::MatX<float> proj_w;
    nn::VecX<float> proj_b;
  };

  Conv2d patch_conv_;
  nn::VecX<float> class_embedding_;
  nn::MatX<float> positional_;  // [1 + native_grid^2, W]; empty when removed
  nn::LayerNormParams<float> ln_pre_, ln_post_;
  std::vector<Block> blocks_;
  nn::MatX<float> proj_;  // [W, E]
  int heads_ = 1;
  int native_grid_ = 7;
  PosEmbeddingMode mode_ = PosEmbeddingMode::Removed;
};

}  // namespace percept::vision

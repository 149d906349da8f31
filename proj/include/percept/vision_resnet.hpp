#pragma once

#include <optional>
#include <vector>

#include "percept/backbone_config.hpp"
#include "percept/sha256.hpp"
#include "percept/vision_common.hpp"

namespace percept::vision {

// The residual-attnpool image encoder: convolutional stem and bottleneck
// stages with blur-free average-pool downsampling, closed by an attention
// pooling head whose positional term is subject to the configured surgery.
class ResNetVisionEncoder {
 public:
  static ResNetVisionEncoder from_archive(const TensorArchive& archive,
                                          PosEmbeddingMode mode,
                                          int native_input_size,
                                          int output_heads);

  Eigen::VectorXf encode(const FeatureMap& image) const;

  int output_dim() const { return static_cast<int>(attn_c_w_.rows()); }
  int native_grid() const { return native_grid_; }
  void fold_weights(Sha256& hasher) const;

 private:
  struct BottleneckBlock {
    Conv2d conv1, conv2, conv3;
    BatchNorm bn1, bn2, bn3;
    int stride = 1;
    std::optional<Conv2d> down_conv;
    std::optional<BatchNorm> down_bn;
    FeatureMap forward(const FeatureMap& x) const;
  };

  Conv2d stem1_, stem2_, stem3_;
  BatchNorm stem_bn1_, stem_bn2_, stem_bn3_;
  std::vector<std::vector<BottleneckBlock>> stages_;

  // Attention pooling head.
  nn::MatX<float> attn_pos_;  // [1 + native_grid^2, C]; empty when removed
  nn::MatX<float> attn_q_w_, attn_k_w_, attn_v_w_, attn_c_w_;
  nn::VecX<float> attn_q_b_, attn_k_b_, attn_v_b_, attn_c_b_;
  int attn_heads_ = 1;
  int native_grid_ = 7;
  PosEmbeddingMode mode_ = PosEmbeddingMode::Removed;
};

}  // namespace percept::vision

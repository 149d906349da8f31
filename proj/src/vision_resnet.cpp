#include "percept/vision_resnet.hpp"

#include <cmath>

#include "percept/errors.hpp"

namespace percept::vision {

namespace {

nn::MatX<float> proj_weight(const TensorArchive& a, const std::string& name) {
  return a.get(name).matrix_f32();
}

void fold(Sha256& h, const nn::MatX<float>& m) {
  h.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(float));
}
void fold(Sha256& h, const Eigen::VectorXf& v) {
  h.update(v.data(), static_cast<std::size_t>(v.size()) * sizeof(float));
}
void fold_bn(Sha256& h, const BatchNorm& bn) {
  fold(h, bn.scale);
  fold(h, bn.shift);
}

}  // namespace

FeatureMap ResNetVisionEncoder::BottleneckBlock::forward(
    const FeatureMap& x) const {
  FeatureMap out = conv1.forward(x);
  bn1.apply_inplace(out);
  relu_inplace(out);
  out = conv2.forward(out);
  bn2.apply_inplace(out);
  relu_inplace(out);
  if (stride > 1) out = avg_pool(out, stride);
  out = conv3.forward(out);
  bn3.apply_inplace(out);

  FeatureMap identity;
  if (down_conv) {
    identity = stride > 1 ? avg_pool(x, stride) : x;
    identity = down_conv->forward(identity);
    down_bn->apply_inplace(identity);
  } else {
    identity = x;
  }
  out.data += identity.data;
  relu_inplace(out);
  return out;
}

ResNetVisionEncoder ResNetVisionEncoder::from_archive(
    const TensorArchive& archive, PosEmbeddingMode mode, int native_input_size,
    int output_heads) {
  ResNetVisionEncoder enc;
  enc.mode_ = mode;
  enc.native_grid_ = native_input_size / 32;

  enc.stem1_ = Conv2d::from_archive(archive, "visual.conv1.weight", 2, 1);
  enc.stem_bn1_ = BatchNorm::from_archive(archive, "visual.bn1");
  enc.stem2_ = Conv2d::from_archive(archive, "visual.conv2.weight", 1, 1);
  enc.stem_bn2_ = BatchNorm::from_archive(archive, "visual.bn2");
  enc.stem3_ = Conv2d::from_archive(archive, "visual.conv3.weight", 1, 1);
  enc.stem_bn3_ = BatchNorm::from_archive(archive, "visual.bn3");

  for (int stage = 1; stage <= 4; ++stage) {
    std::vector<BottleneckBlock> blocks;
    for (int i = 0;; ++i) {
      const std::string prefix =
          "visual.layer" + std::to_string(stage) + "." + std::to_string(i) + ".";
      if (!archive.contains(prefix + "conv1.weight")) break;
      BottleneckBlock b;
      b.conv1 = Conv2d::from_archive(archive, prefix + "conv1.weight", 1, 0);
      b.bn1 = BatchNorm::from_archive(archive, prefix + "bn1");
      b.conv2 = Conv2d::from_archive(archive, prefix + "conv2.weight", 1, 1);
      b.bn2 = BatchNorm::from_archive(archive, prefix + "bn2");
      b.conv3 = Conv2d::from_archive(archive, prefix + "conv3.weight", 1, 0);
      b.bn3 = BatchNorm::from_archive(archive, prefix + "bn3");
      // First block of stages 2-4 downsamples.
      b.stride = (stage > 1 && i == 0) ? 2 : 1;
      if (archive.contains(prefix + "downsample.0.weight")) {
        b.down_conv =
            Conv2d::from_archive(archive, prefix + "downsample.0.weight", 1, 0);
        b.down_bn = BatchNorm::from_archive(archive, prefix + "downsample.1");
      }
      blocks.push_back(std::move(b));
    }
    if (blocks.empty()) {
      throw AssetError("checkpoint is missing visual.layer" +
                       std::to_string(stage) + ".* tensors");
    }
    enc.stages_.push_back(std::move(blocks));
  }

  if (mode != PosEmbeddingMode::Removed) {
    enc.attn_pos_ = proj_weight(archive, "visual.attnpool.positional_embedding");
    const int grid_sq = static_cast<int>(enc.attn_pos_.rows()) - 1;
    const int grid = static_cast<int>(std::lround(std::sqrt(grid_sq)));
    if (grid * grid != grid_sq) {
      throw AssetError("attnpool positional embedding is not a square grid");
    }
    enc.native_grid_ = grid;
  }
  enc.attn_q_w_ = proj_weight(archive, "visual.attnpool.q_proj.weight");
  enc.attn_q_b_ = archive.get("visual.attnpool.q_proj.bias").vector_f32();
  enc.attn_k_w_ = proj_weight(archive, "visual.attnpool.k_proj.weight");
  enc.attn_k_b_ = archive.get("visual.attnpool.k_proj.bias").vector_f32();
  enc.attn_v_w_ = proj_weight(archive, "visual.attnpool.v_proj.weight");
  enc.attn_v_b_ = archive.get("visual.attnpool.v_proj.bias").vector_f32();
  enc.attn_c_w_ = proj_weight(archive, "visual.attnpool.c_proj.weight");
  enc.attn_c_b_ = archive.get("visual.attnpool.c_proj.bias").vector_f32();

  const int embed_dim = static_cast<int>(enc.attn_q_w_.rows());
  enc.attn_heads_ = output_heads > 0 ? output_heads : std::max(1, embed_dim / 64);
  if (embed_dim % enc.attn_heads_ != 0) {
    throw ConfigError("attention pool width not divisible by head count");
  }
  return enc;
}

Eigen::VectorXf ResNetVisionEncoder::encode(const FeatureMap& image) const {
  FeatureMap x = stem1_.forward(image);
  stem_bn1_.apply_inplace(x);
  relu_inplace(x);
  x = stem2_.forward(x);
  stem_bn2_.apply_inplace(x);
  relu_inplace(x);
  x = stem3_.forward(x);
  stem_bn3_.apply_inplace(x);
  relu_inplace(x);
  x = avg_pool(x, 2);
  for (const auto& stage : stages_) {
    for (const auto& block : stage) x = block.forward(x);
  }

  // Attention pooling over [mean token; spatial tokens].
  const int hw = x.height * x.width;
  const int c = x.channels();
  nn::MatX<float> tokens(hw + 1, c);
  tokens.row(0) = x.data.colwise().mean();
  tokens.bottomRows(hw) = x.data;

  if (mode_ == PosEmbeddingMode::Vanilla) {
    if (x.height != native_grid_ || x.width != native_grid_) {
      throw InputError("vanilla positional mode requires the native grid");
    }
    tokens += attn_pos_;
  } else if (mode_ == PosEmbeddingMode::Interpolated) {
    tokens.row(0) += attn_pos_.row(0);
    tokens.bottomRows(hw) += resample_position_grid(
        attn_pos_.bottomRows(attn_pos_.rows() - 1), native_grid_, native_grid_,
        x.height, x.width);
  }
  // Removed: no positional term anywhere.

  const int hd = c / attn_heads_;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
  const Eigen::RowVectorXf q =
      tokens.row(0) * attn_q_w_.transpose() + attn_q_b_.transpose();
  nn::MatX<float> k = tokens * attn_k_w_.transpose();
  k.rowwise() += attn_k_b_.transpose();
  nn::MatX<float> v = tokens * attn_v_w_.transpose();
  v.rowwise() += attn_v_b_.transpose();

  Eigen::RowVectorXf pooled(c);
  for (int h = 0; h < attn_heads_; ++h) {
    const auto qh = q.middleCols(h * hd, hd);
    const auto kh = k.middleCols(h * hd, hd);
    const auto vh = v.middleCols(h * hd, hd);
    Eigen::RowVectorXf logits = (qh * kh.transpose()) * scale;
    const float mx = logits.maxCoeff();
    logits = (logits.array() - mx).exp();
    logits /= logits.sum();
    pooled.middleCols(h * hd, hd) = logits * vh;
  }
  return attn_c_w_ * pooled.transpose() + attn_c_b_;
}

void ResNetVisionEncoder::fold_weights(Sha256& hasher) const {
  fold(hasher, stem1_.weight);
  fold(hasher, stem2_.weight);
  fold(hasher, stem3_.weight);
  fold_bn(hasher, stem_bn1_);
  fold_bn(hasher, stem_bn2_);
  fold_bn(hasher, stem_bn3_);
  for (const auto& stage : stages_) {
    for (const auto& b : stage) {
      fold(hasher, b.conv1.weight);
      fold(hasher, b.conv2.weight);
      fold(hasher, b.conv3.weight);
      fold_bn(hasher, b.bn1);
      fold_bn(hasher, b.bn2);
      fold_bn(hasher, b.bn3);
      if (b.down_conv) fold(hasher, b.down_conv->weight);
      if (b.down_bn) fold_bn(hasher, *b.down_bn);
    }
  }
  if (attn_pos_.size() > 0) fold(hasher, attn_pos_);
  fold(hasher, attn_q_w_);
  fold(hasher, attn_q_b_);
  fold(hasher, attn_k_w_);
  fold(hasher, attn_k_b_);
  fold(hasher, attn_v_w_);
  fold(hasher, attn_v_b_);
  fold(hasher, attn_c_w_);
  fold(hasher, attn_c_b_);
}

}  // namespace percept::vision

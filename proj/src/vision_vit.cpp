#include "percept/vision_vit.hpp"

#include <cmath>

#include "percept/errors.hpp"

namespace percept::vision {

ViTVisionEncoder ViTVisionEncoder::from_archive(const TensorArchive& archive,
                                                PosEmbeddingMode mode,
                                                int native_input_size,
                                                int heads) {
  ViTVisionEncoder enc;
  enc.mode_ = mode;
  enc.patch_conv_ = Conv2d::from_archive(archive, "visual.conv1.weight",
                                         /*stride=*/0, /*pad=*/0);
  enc.patch_conv_.stride = enc.patch_conv_.kh;  // non-overlapping patches
  enc.class_embedding_ = archive.get("visual.class_embedding").vector_f32();
  enc.native_grid_ = native_input_size / enc.patch_conv_.kh;

  if (mode != PosEmbeddingMode::Removed) {
    enc.positional_ = archive.get("visual.positional_embedding").matrix_f32();
    const int grid_sq = static_cast<int>(enc.positional_.rows()) - 1;
    const int grid = static_cast<int>(std::lround(std::sqrt(grid_sq)));
    if (grid * grid != grid_sq) {
      throw AssetError("visual positional embedding is not a square grid");
    }
    enc.native_grid_ = grid;
  }

  enc.ln_pre_.gamma = archive.get("visual.ln_pre.weight").vector_f32();
  enc.ln_pre_.beta = archive.get("visual.ln_pre.bias").vector_f32();
  enc.ln_post_.gamma = archive.get("visual.ln_post.weight").vector_f32();
  enc.ln_post_.beta = archive.get("visual.ln_post.bias").vector_f32();
  enc.proj_ = archive.get("visual.proj").matrix_f32();

  const int width = static_cast<int>(enc.class_embedding_.size());
  enc.heads_ = heads > 0 ? heads : std::max(1, width / 64);
  if (width % enc.heads_ != 0) {
    throw ConfigError("patch transformer width not divisible by head count");
  }
  for (int i = 0;; ++i) {
    const std::string prefix =
        "visual.transformer.resblocks." + std::to_string(i) + ".";
    if (!archive.contains(prefix + "ln_1.weight")) break;
    Block b;
    b.ln1.gamma = archive.get(prefix + "ln_1.weight").vector_f32();
    b.ln1.beta = archive.get(prefix + "ln_1.bias").vector_f32();
    b.attn_in_w = archive.get(prefix + "attn.in_proj_weight").matrix_f32();
    b.attn_in_b = archive.get(prefix + "attn.in_proj_bias").vector_f32();
    b.attn_out_w = archive.get(prefix + "attn.out_proj.weight").matrix_f32();
    b.attn_out_b = archive.get(prefix + "attn.out_proj.bias").vector_f32();
    b.ln2.gamma = archive.get(prefix + "ln_2.weight").vector_f32();
    b.ln2.beta = archive.get(prefix + "ln_2.bias").vector_f32();
    b.fc_w = archive.get(prefix + "mlp.c_fc.weight").matrix_f32();
    b.fc_b = archive.get(prefix + "mlp.c_fc.bias").vector_f32();
    b.proj_w = archive.get(prefix + "mlp.c_proj.weight").matrix_f32();
    b.proj_b = archive.get(prefix + "mlp.c_proj.bias").vector_f32();
    enc.blocks_.push_back(std::move(b));
  }
  if (enc.blocks_.empty()) {
    throw AssetError("checkpoint has no visual.transformer.resblocks.* tensors");
  }
  return enc;
}

Eigen::VectorXf ViTVisionEncoder::encode(const FeatureMap& image) const {
  const FeatureMap patches = patch_conv_.forward(image);
  const int n_patches = patches.height * patches.width;
  const int w = patches.channels();
  nn::MatX<float> x(n_patches + 1, w);
  x.row(0) = class_embedding_.transpose();
  x.bottomRows(n_patches) = patches.data;

  if (mode_ == PosEmbeddingMode::Vanilla) {
    if (patches.height != native_grid_ || patches.width != native_grid_) {
      throw InputError("vanilla positional mode requires the native grid");
    }
    x += positional_;
  } else if (mode_ == PosEmbeddingMode::Interpolated) {
    x.row(0) += positional_.row(0);
    x.bottomRows(n_patches) += resample_position_grid(
        positional_.bottomRows(positional_.rows() - 1), native_grid_,
        native_grid_, patches.height, patches.width);
  }

  x = nn::layer_norm(x, ln_pre_);

  const int n = static_cast<int>(x.rows());
  const int hd = w / heads_;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
  for (const Block& blk : blocks_) {
    const nn::MatX<float> a = nn::layer_norm(x, blk.ln1);
    const nn::MatX<float> qkv = nn::linear(a, blk.attn_in_w, blk.attn_in_b);
    nn::MatX<float> attn_concat(n, w);
    for (int h = 0; h < heads_; ++h) {
      const auto qh = qkv.middleCols(h * hd, hd);
      const auto kh = qkv.middleCols(w + h * hd, hd);
      const auto vh = qkv.middleCols(2 * w + h * hd, hd);
      nn::MatX<float> logits = (qh * kh.transpose()) * scale;
      nn::softmax_rows(logits);
      attn_concat.middleCols(h * hd, hd) = logits * vh;
    }
    x += nn::linear(attn_concat, blk.attn_out_w, blk.attn_out_b);
    const nn::MatX<float> b = nn::layer_norm(x, blk.ln2);
    const nn::MatX<float> f = nn::linear(b, blk.fc_w, blk.fc_b);
    const nn::MatX<float> g = nn::quick_gelu(f);
    x += nn::linear(g, blk.proj_w, blk.proj_b);
  }

  nn::MatX<float> cls = x.topRows(1);
  cls = nn::layer_norm(cls, ln_post_);
  return proj_.transpose() * cls.row(0).transpose();
}

namespace {

void fold(Sha256& h, const nn::MatX<float>& m) {
  h.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(float));
}
void fold(Sha256& h, const Eigen::VectorXf& v) {
  h.update(v.data(), static_cast<std::size_t>(v.size()) * sizeof(float));
}

}  // namespace

void ViTVisionEncoder::fold_weights(Sha256& hasher) const {
  fold(hasher, patch_conv_.weight);
  fold(hasher, class_embedding_);
  if (positional_.size() > 0) fold(hasher, positional_);
  fold(hasher, ln_pre_.gamma);
  fold(hasher, ln_pre_.beta);
  for (const Block& b : blocks_) {
    fold(hasher, b.ln1.gamma);
    fold(hasher, b.ln1.beta);
    fold(hasher, b.attn_in_w);
    fold(hasher, b.attn_in_b);
    fold(hasher, b.attn_out_w);
    fold(hasher, b.attn_out_b);
    fold(hasher, b.ln2.gamma);
    fold(hasher, b.ln2.beta);
    fold(hasher, b.fc_w);
    fold(hasher, b.fc_b);
    fold(hasher, b.proj_w);
    fold(hasher, b.proj_b);
  }
  fold(hasher, ln_post_.gamma);
  fold(hasher, ln_post_.beta);
  fold(hasher, proj_);
}

}  // namespace percept::vision

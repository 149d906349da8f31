#include "percept/backbone.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "percept/sha256.hpp"

namespace percept {

namespace {

using nlohmann::json;

constexpr int kMinInputSide = 32;

std::vector<std::string> expected_tensor_manifest(BackboneVariant variant,
                                                  const TensorArchive& archive) {
  std::vector<std::string> names;
  auto add = [&](const std::string& n) { names.push_back(n); };
  auto add_bn = [&](const std::string& prefix) {
    for (const char* f : {"weight", "bias", "running_mean", "running_var"}) {
      add(prefix + "." + f);
    }
  };

  if (variant == BackboneVariant::ResidualAttnPool) {
    for (int s = 1; s <= 3; ++s) {
      add("visual.conv" + std::to_string(s) + ".weight");
      add_bn("visual.bn" + std::to_string(s));
    }
    for (int stage = 1; stage <= 4; ++stage) {
      int blocks = 0;
      while (archive.contains("visual.layer" + std::to_string(stage) + "." +
                              std::to_string(blocks) + ".conv1.weight")) {
        ++blocks;
      }
      blocks = std::max(blocks, 1);
      for (int i = 0; i < blocks; ++i) {
        const std::string p = "visual.layer" + std::to_string(stage) + "." +
                              std::to_string(i) + ".";
        for (int c = 1; c <= 3; ++c) {
          add(p + "conv" + std::to_string(c) + ".weight");
          add_bn(p + "bn" + std::to_string(c));
        }
        if (i == 0) {
          add(p + "downsample.0.weight");
          add_bn(p + "downsample.1");
        }
      }
    }
    add("visual.attnpool.positional_embedding");
    for (const char* proj : {"q_proj", "k_proj", "v_proj", "c_proj"}) {
      add("visual.attnpool." + std::string(proj) + ".weight");
      add("visual.attnpool." + std::string(proj) + ".bias");
    }
  } else {
    add("visual.conv1.weight");
    add("visual.class_embedding");
    add("visual.positional_embedding");
    add("visual.ln_pre.weight");
    add("visual.ln_pre.bias");
    add("visual.ln_post.weight");
    add("visual.ln_post.bias");
    add("visual.proj");
    int blocks = 0;
    while (archive.contains("visual.transformer.resblocks." +
                            std::to_string(blocks) + ".ln_1.weight")) {
      ++blocks;
    }
    blocks = std::max(blocks, 1);
    for (int i = 0; i < blocks; ++i) {
      const std::string p =
          "visual.transformer.resblocks." + std::to_string(i) + ".";
      for (const char* f :
           {"ln_1.weight", "ln_1.bias", "attn.in_proj_weight",
            "attn.in_proj_bias", "attn.out_proj.weight", "attn.out_proj.bias",
            "ln_2.weight", "ln_2.bias", "mlp.c_fc.weight", "mlp.c_fc.bias",
            "mlp.c_proj.weight", "mlp.c_proj.bias"}) {
        add(p + f);
      }
    }
  }

  add("token_embedding.weight");
  add("positional_embedding");
  add("ln_final.weight");
  add("ln_final.bias");
  add("text_projection");
  int tblocks = 0;
  while (archive.contains("transformer.resblocks." + std::to_string(tblocks) +
                          ".ln_1.weight")) {
    ++tblocks;
  }
  tblocks = std::max(tblocks, 1);
  for (int i = 0; i < tblocks; ++i) {
    const std::string p = "transformer.resblocks." + std::to_string(i) + ".";
    for (const char* f :
         {"ln_1.weight", "ln_1.bias", "attn.in_proj_weight", "attn.in_proj_bias",
          "attn.out_proj.weight", "attn.out_proj.bias", "ln_2.weight",
          "ln_2.bias", "mlp.c_fc.weight", "mlp.c_fc.bias", "mlp.c_proj.weight",
          "mlp.c_proj.bias"}) {
      add(p + f);
    }
  }
  return names;
}

void verify_manifest(BackboneVariant variant, const TensorArchive& archive,
                     const std::string& path) {
  const std::vector<std::string> expected =
      expected_tensor_manifest(variant, archive);
  std::vector<std::string> missing;
  for (const auto& name : expected) {
    if (!archive.contains(name)) missing.push_back(name);
  }
  if (missing.empty()) return;
  std::ostringstream msg;
  msg << "checkpoint '" << path << "' is missing " << missing.size()
      << " tensor(s):";
  for (const auto& m : missing) msg << "\n  " << m;
  msg << "\nexpected tensor-name manifest for " << to_string(variant) << ":";
  for (const auto& e : expected) msg << "\n  " << e;
  throw AssetError(msg.str());
}

}  // namespace

BackboneVariant variant_from_string(const std::string& name) {
  if (name == "residual-attnpool") return BackboneVariant::ResidualAttnPool;
  if (name == "patch-transformer") return BackboneVariant::PatchTransformer;
  throw ConfigError("unknown backbone variant '" + name +
                    "' (residual-attnpool/patch-transformer)");
}

PosEmbeddingMode pos_mode_from_string(const std::string& name) {
  if (name == "removed") return PosEmbeddingMode::Removed;
  if (name == "vanilla") return PosEmbeddingMode::Vanilla;
  if (name == "interpolated") return PosEmbeddingMode::Interpolated;
  throw ConfigError("unknown positional-embedding mode '" + name +
                    "' (removed/vanilla/interpolated)");
}

std::string to_string(BackboneVariant v) {
  return v == BackboneVariant::ResidualAttnPool ? "residual-attnpool"
                                                : "patch-transformer";
}

std::string to_string(PosEmbeddingMode m) {
  switch (m) {
    case PosEmbeddingMode::Removed: return "removed";
    case PosEmbeddingMode::Vanilla: return "vanilla";
    case PosEmbeddingMode::Interpolated: return "interpolated";
  }
  throw ConfigError("invalid positional-embedding mode");
}

ModelCard ModelCard::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AssetError("cannot open model card: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw AssetError("model card is not valid json: " + path + ": " + e.what());
  }
  ModelCard card;
  try {
    for (int c = 0; c < 3; ++c) {
      card.image_mean(c) = j.at("image_mean").at(c).get<float>();
      card.image_std(c) = j.at("image_std").at(c).get<float>();
    }
    card.native_input_size = j.at("native_input_size").get<int>();
    card.variant = j.at("variant").get<std::string>();
    card.context_length = j.value("context_length", 77);
    card.text_heads = j.value("text_heads", 0);
    card.vision_heads = j.value("vision_heads", 0);
    if (j.contains("probe_tokens")) {
      for (const auto& [prompt, ids] : j.at("probe_tokens").items()) {
        card.probe_tokens[prompt] = ids.get<std::vector<std::int32_t>>();
      }
    }
  } catch (const json::exception& e) {
    throw AssetError("model card missing required field: " + path + ": " +
                     e.what());
  }
  return card;
}

void apply_positional_surgery(TensorArchive& weights, PosEmbeddingMode mode) {
  const bool has_attnpool =
      weights.contains("visual.attnpool.positional_embedding");
  const bool has_vit = weights.contains("visual.positional_embedding");
  if (!has_attnpool && !has_vit) {
    throw AssetError(
        "weights carry no positional embedding at a documented key "
        "(visual.attnpool.positional_embedding / visual.positional_embedding)");
  }
  switch (mode) {
    case PosEmbeddingMode::Vanilla:
    case PosEmbeddingMode::Interpolated:
      // Interpolation happens at embed time against the input grid; the
      // stored weights stay byte-identical.
      return;
    case PosEmbeddingMode::Removed:
      if (has_attnpool) weights.erase("visual.attnpool.positional_embedding");
      if (has_vit) weights.erase("visual.positional_embedding");
      return;
  }
  throw ConfigError("invalid positional-embedding mode");
}

Backbone Backbone::load(const BackboneConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::exists(config.checkpoint_path)) {
    throw AssetError("checkpoint not found: " + config.checkpoint_path);
  }
  if (!fs::exists(config.vocab_path)) {
    throw AssetError("vocabulary not found: " + config.vocab_path);
  }

  Backbone b;
  b.config_ = config;
  b.card_ = config.model_card_path.empty()
                ? ModelCard{}
                : ModelCard::load(config.model_card_path);
  if (!config.model_card_path.empty() &&
      variant_from_string(b.card_.variant) != config.variant) {
    throw ConfigError("model card declares variant '" + b.card_.variant +
                      "' but config requests '" + to_string(config.variant) +
                      "'");
  }

  TensorArchive archive = TensorArchive::load(config.checkpoint_path);
  const bool looks_resnet = archive.contains("visual.attnpool.q_proj.weight");
  const bool looks_vit = archive.contains("visual.class_embedding");
  if (config.variant == BackboneVariant::ResidualAttnPool && !looks_resnet) {
    throw ConfigError(
        "config requests residual-attnpool but the checkpoint has no "
        "attention-pool tensors" +
        std::string(looks_vit ? " (it looks like a patch transformer)" : ""));
  }
  if (config.variant == BackboneVariant::PatchTransformer && !looks_vit) {
    throw ConfigError(
        "config requests patch-transformer but the checkpoint has no class "
        "embedding" +
        std::string(looks_resnet ? " (it looks like a residual-attnpool model)"
                                 : ""));
  }
  verify_manifest(config.variant, archive, config.checkpoint_path);
  apply_positional_surgery(archive, config.pos_embedding_mode);

  const int text_width =
      static_cast<int>(archive.get("positional_embedding").shape[1]);
  const int text_heads =
      b.card_.text_heads > 0 ? b.card_.text_heads : std::max(1, text_width / 64);
  b.text_ = std::make_shared<const TextTransformer>(
      TextTransformer::from_archive(archive, text_heads));

  if (config.variant == BackboneVariant::ResidualAttnPool) {
    b.resnet_ = std::make_shared<const vision::ResNetVisionEncoder>(
        vision::ResNetVisionEncoder::from_archive(
            archive, config.pos_embedding_mode, b.card_.native_input_size,
            b.card_.vision_heads));
    if (b.resnet_->output_dim() != b.text_->output_dim()) {
      throw AssetError("image and text embedding dims disagree");
    }
  } else {
    b.vit_ = std::make_shared<const vision::ViTVisionEncoder>(
        vision::ViTVisionEncoder::from_archive(
            archive, config.pos_embedding_mode, b.card_.native_input_size,
            b.card_.vision_heads));
    if (b.vit_->output_dim() != b.text_->output_dim()) {
      throw AssetError("image and text embedding dims disagree");
    }
    b.degraded_accuracy_ =
        config.pos_embedding_mode == PosEmbeddingMode::Removed;
  }

  b.tokenizer_ = std::make_shared<const BpeTokenizer>(
      BpeTokenizer::load(config.vocab_path));
  if (b.tokenizer_->vocab_size() != b.text_->vocab_size()) {
    throw AssetError("vocabulary size " +
                     std::to_string(b.tokenizer_->vocab_size()) +
                     " does not match token embedding rows " +
                     std::to_string(b.text_->vocab_size()));
  }
  // Converter-recorded reference tokenizations, checked once at load.
  for (const auto& [prompt, ids] : b.card_.probe_tokens) {
    const TokenSequence seq =
        b.tokenizer_->encode(prompt, b.card_.context_length);
    if (std::vector<std::int32_t>(seq.ids.begin(),
                                  seq.ids.begin() + seq.length) != ids) {
      throw AssetError("tokenizer does not reproduce the reference ids for "
                       "probe prompt '" +
                       prompt + "'");
    }
  }

  b.checkpoint_sha_ = sha256_file(config.checkpoint_path);
  return b;
}

int Backbone::dim() const { return text_->output_dim(); }

Embedding Backbone::embed_image(const ImageBuffer& image) const {
  validate_image(image);
  const int native = card_.native_input_size;
  if (config_.pos_embedding_mode == PosEmbeddingMode::Vanilla) {
    if (image.height != native || image.width != native) {
      throw InputError("vanilla positional mode requires " +
                       std::to_string(native) + "x" + std::to_string(native) +
                       " input; resize or crop upstream (got " +
                       std::to_string(image.height) + "x" +
                       std::to_string(image.width) + ")");
    }
  } else {
    if (image.height < kMinInputSide || image.width < kMinInputSide) {
      throw InputError("input must be at least " +
                       std::to_string(kMinInputSide) + " pixels per side");
    }
    if (image.pixels() > config_.max_pixels) {
      throw InputError("input has " + std::to_string(image.pixels()) +
                       " pixels, over the configured budget of " +
                       std::to_string(config_.max_pixels) +
                       "; raise max_pixels to allow it");
    }
  }
  const vision::FeatureMap fm =
      vision::to_feature_map(image, card_.image_mean, card_.image_std);
  const Eigen::VectorXf v = resnet_ ? resnet_->encode(fm) : vit_->encode(fm);
  return Embedding::from_float(v);
}

Embedding Backbone::embed_text(const std::string& text) const {
  return embed_tokens(tokenize(text));
}

Embedding Backbone::embed_tokens(const TokenSequence& tokens) const {
  return text_->encode(tokens);
}

TokenSequence Backbone::tokenize(const std::string& text) const {
  return tokenizer_->encode(text, card_.context_length);
}

std::string Backbone::fingerprint() const {
  std::ostringstream ss;
  ss << checkpoint_sha_ << '|' << to_string(config_.variant) << '|'
     << to_string(config_.pos_embedding_mode) << '|' << card_.native_input_size
     << '|' << card_.image_mean.transpose() << '|' << card_.image_std.transpose();
  return sha256_hex(ss.str());
}

std::string Backbone::weights_digest() const {
  // Recomputed from the live weights on every call, so it genuinely detects
  // mutation between calls.
  Sha256 hasher;
  text_->fold_weights(hasher);
  if (resnet_) resnet_->fold_weights(hasher);
  if (vit_) vit_->fold_weights(hasher);
  return hasher.hex_final();
}

}  // namespace percept

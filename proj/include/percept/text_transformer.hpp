#pragma once

#include <memory>
#include <vector>

#include "percept/embedding.hpp"
#include "percept/nn.hpp"
#include "percept/sha256.hpp"
#include "percept/tensor_archive.hpp"
#include "percept/tokenizer.hpp"

namespace percept {

// The causal text encoder: token embeddings + positional embeddings through
// masked residual attention blocks, final layer norm at the end-of-text
// position, then the text projection. Computation is in float64 so the
// frozen scoring path and the prompt tuner share one code path bit for bit.
class TextTransformer {
 public:
  struct Block {
    nn::LayerNormParams<double> ln1, ln2;
    nn::MatX<double> attn_in_w;   // [3W, W] packed q,k,v
    nn::VecX<double> attn_in_b;   // [3W]
    nn::MatX<double> attn_out_w;  // [W, W]
    nn::VecX<double> attn_out_b;
    nn::MatX<double> fc_w;        // [4W, W]
    nn::VecX<double> fc_b;
    nn::MatX<double> proj_w;      // [W, 4W]
    nn::VecX<double> proj_b;
  };

  // Intermediates captured by a forward pass, consumed by backward().
  struct Trace;

  TextTransformer() = default;

  // Reads the documented tensor names from a converted checkpoint archive.
  static TextTransformer from_archive(const TensorArchive& archive, int heads);

  int width() const { return static_cast<int>(positional_.cols()); }
  int output_dim() const { return static_cast<int>(text_projection_.cols()); }
  int context_length() const { return static_cast<int>(positional_.rows()); }
  int vocab_size() const { return static_cast<int>(token_embedding_.rows()); }
  int heads() const { return heads_; }
  int layers() const { return static_cast<int>(blocks_.size()); }

  // Token-embedding rows for the given ids (the tuner's initialization).
  nn::MatX<double> embedding_rows(const std::vector<std::int32_t>& ids) const;

  // Embeds a padded token sequence. Positions after end-of-text cannot
  // influence the result under the causal mask, so only the first
  // `seq.length` positions are computed.
  Embedding encode(const TokenSequence& seq) const;

  // Forward from explicit input rows (token embeddings before the positional
  // add). Row `eot_pos` is projected to the output embedding. Pass a Trace to
  // enable backward().
  Eigen::VectorXd forward_rows(const nn::MatX<double>& rows, int eot_pos,
                               Trace* trace = nullptr) const;

  // Gradient of <grad_out, output> w.r.t. the input rows of the traced
  // forward pass. The transformer weights are frozen; no weight gradients
  // exist anywhere in this module.
  nn::MatX<double> backward_rows(const Trace& trace,
                                 const Eigen::VectorXd& grad_out) const;

  // Folds every weight tensor into the hasher (frozen-weights checks).
  void fold_weights(Sha256& hasher) const;

  struct Trace {
    nn::MatX<double> rows;  // input incl. positional add
    int eot_pos = 0;
    struct BlockTrace {
      nn::MatX<double> x_in;               // residual stream entering the block
      nn::LayerNormCache<double> ln1_cache;
      nn::MatX<double> ln1_out;
      nn::MatX<double> q, k, v;            // post in_proj, pre head split
      std::vector<nn::MatX<double>> probs; // per-head attention, masked rows
      nn::MatX<double> attn_concat;        // heads re-joined, pre out_proj
      nn::MatX<double> x_mid;              // after attention residual
      nn::LayerNormCache<double> ln2_cache;
      nn::MatX<double> ln2_out;
      nn::MatX<double> fc_pre_act;         // c_fc output before the gelu
      nn::MatX<double> gelu_out;
    };
    std::vector<BlockTrace> blocks;
    nn::MatX<double> final_in;             // residual stream before ln_final
    nn::LayerNormCache<double> final_ln_cache;
    nn::MatX<double> final_ln_out;
  };

 private:
  nn::MatX<double> token_embedding_;  // [vocab, W]
  nn::MatX<double> positional_;       // [context, W]
  std::vector<Block> blocks_;
  nn::LayerNormParams<double> ln_final_;
  nn::MatX<double> text_projection_;  // [W, E]
  int heads_ = 1;
};

}  // namespace percept

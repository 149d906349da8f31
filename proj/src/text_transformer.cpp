#include "percept/text_transformer.hpp"

#include <cmath>
#include <limits>

#include "percept/errors.hpp"

namespace percept {

namespace {

nn::MatX<double> mat64(const TensorArchive& a, const std::string& name) {
  const ArchiveTensor& t = a.get(name);
  if (t.dtype == Dtype::F64) return t.matrix_f64();
  return t.matrix_f32().cast<double>();
}

nn::VecX<double> vec64(const TensorArchive& a, const std::string& name) {
  const ArchiveTensor& t = a.get(name);
  if (t.dtype == Dtype::F64) return t.vector_f64();
  return t.vector_f32().cast<double>();
}

}  // namespace

TextTransformer TextTransformer::from_archive(const TensorArchive& archive,
                                              int heads) {
  TextTransformer t;
  t.token_embedding_ = mat64(archive, "token_embedding.weight");
  t.positional_ = mat64(archive, "positional_embedding");
  t.ln_final_.gamma = vec64(archive, "ln_final.weight");
  t.ln_final_.beta = vec64(archive, "ln_final.bias");
  t.text_projection_ = mat64(archive, "text_projection");
  t.heads_ = heads;
  const int width = t.width();
  if (heads < 1 || width % heads != 0) {
    throw ConfigError("text transformer width " + std::to_string(width) +
                      " not divisible by head count " + std::to_string(heads));
  }
  for (int i = 0;; ++i) {
    const std::string prefix = "transformer.resblocks." + std::to_string(i) + ".";
    if (!archive.contains(prefix + "ln_1.weight")) break;
    Block b;
    b.ln1.gamma = vec64(archive, prefix + "ln_1.weight");
    b.ln1.beta = vec64(archive, prefix + "ln_1.bias");
    b.attn_in_w = mat64(archive, prefix + "attn.in_proj_weight");
    b.attn_in_b = vec64(archive, prefix + "attn.in_proj_bias");
    b.attn_out_w = mat64(archive, prefix + "attn.out_proj.weight");
    b.attn_out_b = vec64(archive, prefix + "attn.out_proj.bias");
    b.ln2.gamma = vec64(archive, prefix + "ln_2.weight");
    b.ln2.beta = vec64(archive, prefix + "ln_2.bias");
    b.fc_w = mat64(archive, prefix + "mlp.c_fc.weight");
    b.fc_b = vec64(archive, prefix + "mlp.c_fc.bias");
    b.proj_w = mat64(archive, prefix + "mlp.c_proj.weight");
    b.proj_b = vec64(archive, prefix + "mlp.c_proj.bias");
    if (b.attn_in_w.rows() != 3 * width || b.attn_in_w.cols() != width) {
      throw AssetError("attn.in_proj_weight of block " + std::to_string(i) +
                       " has unexpected shape");
    }
    t.blocks_.push_back(std::move(b));
  }
  if (t.blocks_.empty()) {
    throw AssetError("checkpoint has no transformer.resblocks.* tensors");
  }
  return t;
}

nn::MatX<double> TextTransformer::embedding_rows(
    const std::vector<std::int32_t>& ids) const {
  nn::MatX<double> rows(ids.size(), width());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab_size()) {
      throw ContractViolation("token id out of vocabulary range");
    }
    rows.row(static_cast<Eigen::Index>(i)) = token_embedding_.row(ids[i]);
  }
  return rows;
}

Embedding TextTransformer::encode(const TokenSequence& seq) const {
  if (seq.length < 2 || seq.length > context_length()) {
    throw InputError("token sequence length " + std::to_string(seq.length) +
                     " outside [2, " + std::to_string(context_length()) + "]");
  }
  std::vector<std::int32_t> ids(seq.ids.begin(), seq.ids.begin() + seq.length);
  const nn::MatX<double> rows = embedding_rows(ids);
  return Embedding(forward_rows(rows, seq.eot_pos()));
}

Eigen::VectorXd TextTransformer::forward_rows(const nn::MatX<double>& rows,
                                              int eot_pos, Trace* trace) const {
  const int n = static_cast<int>(rows.rows());
  const int w = width();
  if (rows.cols() != w) {
    throw ContractViolation("input rows have width " +
                            std::to_string(rows.cols()) + ", expected " +
                            std::to_string(w));
  }
  if (n < 1 || n > context_length()) {
    throw ContractViolation("sequence length outside positional table");
  }
  if (eot_pos < 0 || eot_pos >= n) {
    throw ContractViolation("eot position out of range");
  }
  const int hd = w / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  nn::MatX<double> x = rows + positional_.topRows(n);
  if (trace) {
    trace->rows = x;
    trace->eot_pos = eot_pos;
    trace->blocks.clear();
    trace->blocks.resize(blocks_.size());
  }

  for (std::size_t li = 0; li < blocks_.size(); ++li) {
    const Block& blk = blocks_[li];
    Trace::BlockTrace* bt = trace ? &trace->blocks[li] : nullptr;
    if (bt) bt->x_in = x;

    nn::LayerNormCache<double> ln1_cache;
    const nn::MatX<double> a =
        nn::layer_norm(x, blk.ln1, bt ? &ln1_cache : nullptr);
    const nn::MatX<double> qkv = nn::linear(a, blk.attn_in_w, blk.attn_in_b);
    const nn::MatX<double> q = qkv.leftCols(w);
    const nn::MatX<double> k = qkv.middleCols(w, w);
    const nn::MatX<double> v = qkv.rightCols(w);

    nn::MatX<double> attn_concat(n, w);
    std::vector<nn::MatX<double>> probs;
    if (bt) probs.reserve(heads_);
    for (int h = 0; h < heads_; ++h) {
      const auto qh = q.middleCols(h * hd, hd);
      const auto kh = k.middleCols(h * hd, hd);
      const auto vh = v.middleCols(h * hd, hd);
      nn::MatX<double> logits = (qh * kh.transpose()) * scale;
      // Causal mask: position i attends to j <= i.
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          logits(i, j) = -std::numeric_limits<double>::infinity();
        }
      }
      nn::softmax_rows(logits);
      attn_concat.middleCols(h * hd, hd) = logits * vh;
      if (bt) probs.push_back(std::move(logits));
    }
    const nn::MatX<double> attn_out =
        nn::linear(attn_concat, blk.attn_out_w, blk.attn_out_b);
    nn::MatX<double> x_mid = x + attn_out;

    nn::LayerNormCache<double> ln2_cache;
    const nn::MatX<double> b =
        nn::layer_norm(x_mid, blk.ln2, bt ? &ln2_cache : nullptr);
    const nn::MatX<double> f = nn::linear(b, blk.fc_w, blk.fc_b);
    const nn::MatX<double> g = nn::quick_gelu(f);
    const nn::MatX<double> m = nn::linear(g, blk.proj_w, blk.proj_b);

    if (bt) {
      bt->ln1_cache = std::move(ln1_cache);
      bt->ln1_out = a;
      bt->q = q;
      bt->k = k;
      bt->v = v;
      bt->probs = std::move(probs);
      bt->attn_concat = attn_concat;
      bt->x_mid = x_mid;
      bt->ln2_cache = std::move(ln2_cache);
      bt->ln2_out = b;
      bt->fc_pre_act = f;
      bt->gelu_out = g;
    }
    x = x_mid + m;
  }

  nn::LayerNormCache<double> final_cache;
  const nn::MatX<double> h =
      nn::layer_norm(x, ln_final_, trace ? &final_cache : nullptr);
  if (trace) {
    trace->final_in = x;
    trace->final_ln_cache = std::move(final_cache);
    trace->final_ln_out = h;
  }
  return text_projection_.transpose() * h.row(eot_pos).transpose();
}

nn::MatX<double> TextTransformer::backward_rows(
    const Trace& trace, const Eigen::VectorXd& grad_out) const {
  const int n = static_cast<int>(trace.rows.rows());
  const int w = width();
  const int hd = w / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  // d/dh of <grad_out, proj^T h_eot> lands on the eot row only; ln_final is
  // per-row so other rows receive zero gradient from it.
  nn::MatX<double> dh = nn::MatX<double>::Zero(n, w);
  dh.row(trace.eot_pos) = (text_projection_ * grad_out).transpose();
  nn::MatX<double> dx =
      nn::layer_norm_backward(dh, ln_final_, trace.final_ln_cache);

  for (int li = static_cast<int>(blocks_.size()) - 1; li >= 0; --li) {
    const Block& blk = blocks_[li];
    const Trace::BlockTrace& bt = trace.blocks[static_cast<std::size_t>(li)];

    // x_out = x_mid + proj(gelu(fc(ln2(x_mid))))
    const nn::MatX<double> dg = dx * blk.proj_w;
    const nn::MatX<double> df = nn::quick_gelu_backward(dg, bt.fc_pre_act);
    const nn::MatX<double> db = df * blk.fc_w;
    nn::MatX<double> dx_mid =
        dx + nn::layer_norm_backward(db, blk.ln2, bt.ln2_cache);

    // x_mid = x_in + out_proj(attn(ln1(x_in)))
    const nn::MatX<double> dconcat = dx_mid * blk.attn_out_w;
    nn::MatX<double> dq(n, w), dk(n, w), dv(n, w);
    for (int h = 0; h < heads_; ++h) {
      const auto qh = bt.q.middleCols(h * hd, hd);
      const auto kh = bt.k.middleCols(h * hd, hd);
      const auto vh = bt.v.middleCols(h * hd, hd);
      const nn::MatX<double>& p = bt.probs[static_cast<std::size_t>(h)];
      const auto doh = dconcat.middleCols(h * hd, hd);
      const nn::MatX<double> dp = doh * vh.transpose();
      dv.middleCols(h * hd, hd) = p.transpose() * doh;
      // Masked entries have p == 0, so their gradient vanishes on its own.
      const nn::MatX<double> dlogits = nn::softmax_rows_backward(dp, p);
      dq.middleCols(h * hd, hd) = (dlogits * kh) * scale;
      dk.middleCols(h * hd, hd) = (dlogits.transpose() * qh) * scale;
    }
    nn::MatX<double> dqkv(n, 3 * w);
    dqkv.leftCols(w) = dq;
    dqkv.middleCols(w, w) = dk;
    dqkv.rightCols(w) = dv;
    const nn::MatX<double> da = dqkv * blk.attn_in_w;
    dx = dx_mid + nn::layer_norm_backward(da, blk.ln1, bt.ln1_cache);
  }
  // The positional add is a constant offset; gradient passes through.
  return dx;
}

namespace {

void fold(Sha256& h, const nn::MatX<double>& m) {
  h.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}
void fold(Sha256& h, const nn::VecX<double>& v) {
  h.update(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

}  // namespace

void TextTransformer::fold_weights(Sha256& hasher) const {
  fold(hasher, token_embedding_);
  fold(hasher, positional_);
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
  fold(hasher, ln_final_.gamma);
  fold(hasher, ln_final_.beta);
  fold(hasher, text_projection_);
}

}  // namespace percept

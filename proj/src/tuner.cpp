#include "percept/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "percept/metrics.hpp"
#include "percept/sha256.hpp"
#include "percept/scoring.hpp"
#include "percept/tensor_archive.hpp"

namespace percept {

namespace {

std::vector<std::int32_t> word_ids(const BpeTokenizer& tokenizer,
                                   const std::string& text) {
  const std::vector<std::int32_t> ids = tokenizer.encode_words(text);
  if (ids.empty()) throw InputError("prompt tokenizes to nothing: " + text);
  // encode() would add the two specials; enforce the same context budget.
  if (static_cast<int>(ids.size()) + 2 > BpeTokenizer::kDefaultContextLength) {
    throw InputError("prompt over the context limit: " + text);
  }
  return ids;
}

// Rows [sot; ctx; eot]; returns the eot position.
int scaffold(const LearnableContext& ctx, const nn::MatX<double>& side,
             const TextTransformer& text, nn::MatX<double>& rows) {
  const int len = static_cast<int>(side.rows());
  rows.resize(len + 2, side.cols());
  rows.row(0) = text.embedding_rows({ctx.sot_id}).row(0);
  rows.middleRows(1, len) = side;
  rows.row(len + 1) = text.embedding_rows({ctx.eot_id}).row(0);
  return len + 1;
}

struct PromptForward {
  Eigen::VectorXd embedding;
  TextTransformer::Trace trace;
};

PromptForward run_side(const LearnableContext& ctx, const nn::MatX<double>& side,
                       const TextTransformer& text) {
  PromptForward out;
  nn::MatX<double> rows;
  const int eot_pos = scaffold(ctx, side, text, rows);
  out.embedding = text.forward_rows(rows, eot_pos, &out.trace);
  return out;
}

double cosine_raw(const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                  double& nx, double& nt) {
  nx = x.norm();
  nt = t.norm();
  if (nx == 0.0 || nt == 0.0) {
    throw DegenerateInput("zero-norm embedding in tuner forward");
  }
  return x.dot(t) / (nx * nt);
}

}  // namespace

LearnableContext init_context(const PromptPair& pair,
                              const TextTransformer& text,
                              const BpeTokenizer& tokenizer) {
  LearnableContext ctx;
  ctx.sot_id = tokenizer.sot_id();
  ctx.eot_id = tokenizer.eot_id();
  ctx.positive_ctx = text.embedding_rows(word_ids(tokenizer, pair.positive_text));
  ctx.negative_ctx = text.embedding_rows(word_ids(tokenizer, pair.negative_text));
  return ctx;
}

double forward_score(const Embedding& image_embedding,
                     const LearnableContext& context,
                     const TextTransformer& text) {
  const PromptForward pos = run_side(context, context.positive_ctx, text);
  const PromptForward neg = run_side(context, context.negative_ctx, text);
  return pair_score(
      cosine_similarity(image_embedding, Embedding(pos.embedding)),
      cosine_similarity(image_embedding, Embedding(neg.embedding)));
}

TuneResult tune(const std::vector<TrainExample>& examples,
                const PromptPair& pair, const TextTransformer& text,
                const BpeTokenizer& tokenizer, const TuneConfig& config) {
  if (config.learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (config.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");

  // Deterministic validation split.
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x5eedcafef00dULL);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_val = std::min(
      examples.size() > 1 ? examples.size() - 1 : 0,
      static_cast<std::size_t>(
          std::floor(config.validation_fraction * examples.size())));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
  if (train_idx.empty()) throw InputError("tune: empty training split");

  LearnableContext ctx = init_context(pair, text, tokenizer);
  double lab_min = examples[train_idx[0]].label;
  double lab_max = lab_min;
  for (const std::size_t i : train_idx) {
    lab_min = std::min(lab_min, examples[i].label);
    lab_max = std::max(lab_max, examples[i].label);
  }
  if (lab_max == lab_min) {
    throw InputError("tune: training labels are constant, cannot scale");
  }
  ctx.label_min = lab_min;
  ctx.label_max = lab_max;
  auto scaled = [&](double label) {
    return (label - lab_min) / (lab_max - lab_min);
  };

  TuneResult result;

  // Per-iteration cost is two prompt forwards + two backwards regardless of
  // batch size: the batch only changes the accumulated embedding gradient.
  auto score_all = [&](const std::vector<std::size_t>& idx,
                       const Eigen::VectorXd& t1, const Eigen::VectorXd& t2,
                       std::vector<double>* out_scores) {
    double nx, nt;
    double sum_sq = 0.0;
    for (const std::size_t i : idx) {
      const double s1 =
          cosine_raw(examples[i].embedding.values(), t1, nx, nt);
      const double s2 =
          cosine_raw(examples[i].embedding.values(), t2, nx, nt);
      const double score = pair_score(s1, s2);
      if (out_scores) out_scores->push_back(score);
      const double err = score - scaled(examples[i].label);
      sum_sq += err * err;
    }
    return sum_sq / static_cast<double>(idx.size());
  };

  auto evaluate = [&](int iteration) {
    const PromptForward pos = run_side(ctx, ctx.positive_ctx, text);
    const PromptForward neg = run_side(ctx, ctx.negative_ctx, text);
    TuneLogRecord rec;
    rec.iteration = iteration;
    rec.loss = score_all(train_idx, pos.embedding, neg.embedding, nullptr);
    rec.val_srocc = std::numeric_limits<double>::quiet_NaN();
    if (val_idx.size() >= 2) {
      std::vector<double> scores, labels;
      scores.reserve(val_idx.size());
      for (const std::size_t i : val_idx) labels.push_back(examples[i].label);
      score_all(val_idx, pos.embedding, neg.embedding, &scores);
      try {
        rec.val_srocc = srocc(PairedSamples(scores, labels));
      } catch (const DegenerateInput&) {
        // Constant scores early in training; leave NaN.
      }
    }
    if (!std::isfinite(rec.loss)) {
      throw TuneDivergence("training loss became non-finite at iteration " +
                               std::to_string(iteration),
                           ctx, result.log);
    }
    result.log.push_back(rec);
  };

  evaluate(0);

  std::vector<std::size_t> epoch = train_idx;
  std::size_t cursor = epoch.size();  // force shuffle on first use
  LearnableContext last_finite = ctx;

  for (int it = 1; it <= config.iterations; ++it) {
    // Gather the batch (epoch shuffling, wrap on exhaustion).
    std::vector<std::size_t> batch;
    batch.reserve(static_cast<std::size_t>(config.batch_size));
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor >= epoch.size()) {
        std::shuffle(epoch.begin(), epoch.end(), rng);
        cursor = 0;
      }
      batch.push_back(epoch[cursor++]);
    }

    const PromptForward pos = run_side(ctx, ctx.positive_ctx, text);
    const PromptForward neg = run_side(ctx, ctx.negative_ctx, text);
    const Eigen::VectorXd& t1 = pos.embedding;
    const Eigen::VectorXd& t2 = neg.embedding;
    const double nt1 = t1.norm();
    const double nt2 = t2.norm();

    Eigen::VectorXd dt1 = Eigen::VectorXd::Zero(t1.size());
    Eigen::VectorXd dt2 = Eigen::VectorXd::Zero(t2.size());
    bool finite = true;
    for (const std::size_t i : batch) {
      const Eigen::VectorXd& x = examples[i].embedding.values();
      const double nx = x.norm();
      const double s1 = x.dot(t1) / (nx * nt1);
      const double s2 = x.dot(t2) / (nx * nt2);
      const double score = pair_score(s1, s2);
      const double dscore = 2.0 * (score - scaled(examples[i].label)) /
                            static_cast<double>(batch.size());
      const double dsig = dscore * score * (1.0 - score);
      if (!std::isfinite(dsig)) {
        finite = false;
        break;
      }
      // d cos(x,t)/dt = x/(|x||t|) - cos * t/|t|^2
      dt1 += dsig * (x / (nx * nt1) - s1 * t1 / (nt1 * nt1));
      dt2 -= dsig * (x / (nx * nt2) - s2 * t2 / (nt2 * nt2));
    }
    if (!finite || !dt1.allFinite() || !dt2.allFinite()) {
      throw TuneDivergence("gradient became non-finite at iteration " +
                               std::to_string(it),
                           last_finite, result.log);
    }

    const nn::MatX<double> dpos_rows = text.backward_rows(pos.trace, dt1);
    const nn::MatX<double> dneg_rows = text.backward_rows(neg.trace, dt2);
    ctx.positive_ctx -=
        config.learning_rate *
        dpos_rows.middleRows(1, ctx.positive_ctx.rows());
    ctx.negative_ctx -=
        config.learning_rate *
        dneg_rows.middleRows(1, ctx.negative_ctx.rows());

    if (ctx.positive_ctx.allFinite() && ctx.negative_ctx.allFinite()) {
      last_finite = ctx;
    } else {
      throw TuneDivergence("context became non-finite at iteration " +
                               std::to_string(it),
                           last_finite, result.log);
    }

    if (config.eval_every > 0 && (it % config.eval_every == 0 ||
                                  it == config.iterations)) {
      evaluate(it);
    }
  }

  result.context = ctx;
  return result;
}

std::pair<Embedding, Embedding> context_text_embeddings(
    const LearnableContext& context, const TextTransformer& text) {
  const PromptForward pos = run_side(context, context.positive_ctx, text);
  const PromptForward neg = run_side(context, context.negative_ctx, text);
  return {Embedding(pos.embedding), Embedding(neg.embedding)};
}

std::string context_digest(const LearnableContext& context) {
  Sha256 hasher;
  auto fold = [&](const nn::MatX<double>& m) {
    hasher.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  };
  fold(context.positive_ctx);
  fold(context.negative_ctx);
  const double meta[4] = {static_cast<double>(context.sot_id),
                          static_cast<double>(context.eot_id),
                          context.label_min, context.label_max};
  hasher.update(meta, sizeof(meta));
  return hasher.hex_final();
}

void export_context(const LearnableContext& context, const std::string& path) {
  TensorArchive archive;
  archive.put("positive_ctx", ArchiveTensor::from_matrix(context.positive_ctx));
  archive.put("negative_ctx", ArchiveTensor::from_matrix(context.negative_ctx));
  Eigen::VectorXd meta(4);
  meta << static_cast<double>(context.sot_id),
      static_cast<double>(context.eot_id), context.label_min,
      context.label_max;
  archive.put("context_meta", ArchiveTensor::from_vector(meta));
  archive.save(path);
}

LearnableContext import_context(const std::string& path) {
  const TensorArchive archive = TensorArchive::load(path);
  LearnableContext ctx;
  ctx.positive_ctx = archive.get("positive_ctx").matrix_f64();
  ctx.negative_ctx = archive.get("negative_ctx").matrix_f64();
  const Eigen::VectorXd meta = archive.get("context_meta").vector_f64();
  if (meta.size() != 4) throw AssetError("context_meta must have 4 entries");
  ctx.sot_id = static_cast<std::int32_t>(meta(0));
  ctx.eot_id = static_cast<std::int32_t>(meta(1));
  ctx.label_min = meta(2);
  ctx.label_max = meta(3);
  return ctx;
}

}  // namespace percept

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percept/embedding.hpp"
#include "percept/errors.hpp"
#include "percept/nn.hpp"
#include "percept/prompts.hpp"
#include "percept/text_transformer.hpp"
#include "percept/tokenizer.hpp"

namespace percept {

// Learnable prompt-context token embeddings for one antonym pair. The rows
// are the full rendered prompts minus start/end markers; both sides are
// optimized while every backbone weight stays frozen.
struct LearnableContext {
  nn::MatX<double> positive_ctx;  // [len_pos, token embedding width]
  nn::MatX<double> negative_ctx;  // [len_neg, token embedding width]
  std::int32_t sot_id = 0;
  std::int32_t eot_id = 0;
  // Affine map applied to MOS labels during tuning, stored with the context
  // so scores and labels stay comparable at inference.
  double label_min = 0.0;
  double label_max = 1.0;
};

struct TuneConfig {
  double learning_rate = 0.002;
  int iterations = 100000;
  int batch_size = 64;
  std::uint64_t seed = 0;
  // Full-split loss and validation SROCC are evaluated at iteration 0, every
  // eval_every iterations, and at the end.
  int eval_every = 500;
  // Held-out slice of the training examples used for validation SROCC.
  double validation_fraction = 0.1;
};

struct TrainExample {
  Embedding embedding;  // precomputed image embedding (backbone is frozen)
  double label = 0.0;   // raw MOS
};

struct TuneLogRecord {
  int iteration = 0;
  double loss = 0.0;       // MSE over the training slice
  double val_srocc = 0.0;  // NaN when no validation slice exists
};

struct TuneResult {
  LearnableContext context;
  std::vector<TuneLogRecord> log;
};

// Raised when the loss goes non-finite; carries the last finite context so
// callers can checkpoint it.
class TuneDivergence : public DivergenceError {
 public:
  TuneDivergence(const std::string& msg, LearnableContext last,
                 std::vector<TuneLogRecord> log)
      : DivergenceError(msg), last_context(std::move(last)),
        partial_log(std::move(log)) {}
  LearnableContext last_context;
  std::vector<TuneLogRecord> partial_log;
};

// Context matrices equal to the token embeddings of the rendered prompts,
// so iteration 0 reproduces the frozen pair scores exactly.
LearnableContext init_context(const PromptPair& pair,
                              const TextTransformer& text,
                              const BpeTokenizer& tokenizer);

// Pair score with text embeddings computed from the context matrices pushed
// through the frozen text encoder. Differentiable w.r.t. context entries
// only.
double forward_score(const Embedding& image_embedding,
                     const LearnableContext& context,
                     const TextTransformer& text);

// Plain SGD on the context matrices against MSE to [0,1]-scaled labels.
// Deterministic given config.seed. Labels are scaled by the training-slice
// min/max, which is stored in the returned context.
TuneResult tune(const std::vector<TrainExample>& examples,
                const PromptPair& pair, const TextTransformer& text,
                const BpeTokenizer& tokenizer, const TuneConfig& config);

// Text embeddings of the (positive, negative) context through the frozen
// encoder, for scoring whole datasets without re-running the text side per
// image.
std::pair<Embedding, Embedding> context_text_embeddings(
    const LearnableContext& context, const TextTransformer& text);

// Digest identifying the context contents (cache keys, report ids).
std::string context_digest(const LearnableContext& context);

// Lossless round-trip through a small tensor-archive file (kilobytes).
void export_context(const LearnableContext& context, const std::string& path);
LearnableContext import_context(const std::string& path);

}  // namespace percept

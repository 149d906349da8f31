#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "percept/embedding.hpp"
#include "percept/prompts.hpp"

namespace percept {

// Per-image, per-attribute result: the two raw cosines and the paired score.
struct AttributeScore {
  std::string attribute;
  double s1 = 0.0;  // cosine to the positive prompt, in [-1, 1]
  double s2 = 0.0;  // cosine to the negative prompt, in [-1, 1]
  double score = 0.0;  // exp(s1) / (exp(s1) + exp(s2)), strictly in (0, 1)
  std::string positive_prompt;
  std::string negative_prompt;
};

// (x . t) / (|x| |t|). Symmetric, scale-invariant for positive scales.
// Throws ContractViolation on dimension mismatch, DegenerateInput on a
// zero-norm argument.
double cosine_similarity(const Embedding& x, const Embedding& t);

// The naive single-prompt score: identical to cosine_similarity, exposed
// separately so single-prompt vs. paired ablations are runnable.
double single_prompt_score(const Embedding& x, const Embedding& t);

// exp(s1) / (exp(s1) + exp(s2)), computed in the overflow-safe form.
// Strictly increasing in s1, strictly decreasing in s2;
// pair_score(a, b) + pair_score(b, a) == 1.
// Optional scale multiplies both inputs before the softmax (default 1, i.e.
// the raw-cosine form; no pretrained logit scale is applied).
double pair_score(double s1, double s2, double scale = 1.0);

// Scores one image against an antonym pair. text_embeddings must be ordered
// (positive, negative) to match the pair; a swapped order is a caller
// contract violation that cannot be detected here.
AttributeScore score_image(const Embedding& image_embedding,
                           const PromptPair& pair,
                           const std::pair<Embedding, Embedding>& text_embeddings);

// Maps a rendered prompt text to its embedding. Backed by a real text
// encoder in production and by fixed tables in tests.
using TextEmbeddingProvider = std::function<Embedding(const std::string&)>;

// One AttributeScore per pair, input order preserved. Duplicate attribute
// names raise ConfigError.
std::vector<AttributeScore> score_attributes(
    const Embedding& image_embedding, const std::vector<PromptPair>& pairs,
    const TextEmbeddingProvider& text_embeddings);

enum class CompareLabel { A, B };

struct CompareResult {
  CompareLabel label = CompareLabel::A;
  bool tie = false;  // exact score tie; label is then A by convention
  AttributeScore score_a;
  AttributeScore score_b;
};

// Labels the higher-scoring image. Exact ties resolve to A with the tie
// flag set so accuracy computations can count them as 0.5.
CompareResult compare_images(const Embedding& embedding_a,
                             const Embedding& embedding_b,
                             const PromptPair& pair,
                             const std::pair<Embedding, Embedding>& text_embeddings);

}  // namespace percept

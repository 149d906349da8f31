#include "percept/scoring.hpp"

#include <cmath>
#include <set>

#include "percept/errors.hpp"

namespace percept {

double cosine_similarity(const Embedding& x, const Embedding& t) {
  if (x.dim() != t.dim()) {
    throw ContractViolation("cosine_similarity: dimension mismatch (" +
                            std::to_string(x.dim()) + " vs " +
                            std::to_string(t.dim()) + ")");
  }
  const double nx = x.norm();
  const double nt = t.norm();
  if (nx == 0.0 || nt == 0.0) {
    throw DegenerateInput("cosine_similarity: zero-norm embedding");
  }
  const double c = x.values().dot(t.values()) / (nx * nt);
  // Guard against rounding pushing |c| past 1.
  return std::clamp(c, -1.0, 1.0);
}

double single_prompt_score(const Embedding& x, const Embedding& t) {
  return cosine_similarity(x, t);
}

double pair_score(double s1, double s2, double scale) {
  if (!std::isfinite(s1) || !std::isfinite(s2) || !std::isfinite(scale)) {
    throw ContractViolation("pair_score: non-finite input");
  }
  const double d = scale * (s2 - s1);
  // 1 / (1 + e^d), evaluated so the exponent is never positive. The same
  // e^-|d| appears in both orderings, which keeps the complement identity
  // pair_score(a,b) + pair_score(b,a) == 1 tight.
  if (d >= 0.0) {
    const double u = std::exp(-d);
    return u / (1.0 + u);
  }
  const double u = std::exp(d);
  return 1.0 / (1.0 + u);
}

AttributeScore score_image(const Embedding& image_embedding,
                           const PromptPair& pair,
                           const std::pair<Embedding, Embedding>& text_embeddings) {
  AttributeScore out;
  out.attribute = pair.attribute;
  out.positive_prompt = pair.positive_text;
  out.negative_prompt = pair.negative_text;
  out.s1 = cosine_similarity(image_embedding, text_embeddings.first);
  out.s2 = cosine_similarity(image_embedding, text_embeddings.second);
  out.score = pair_score(out.s1, out.s2);
  return out;
}

std::vector<AttributeScore> score_attributes(
    const Embedding& image_embedding, const std::vector<PromptPair>& pairs,
    const TextEmbeddingProvider& text_embeddings) {
  if (pairs.empty()) {
    throw ContractViolation("score_attributes: empty pair list");
  }
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    if (!seen.insert(p.attribute).second) {
      throw ConfigError("score_attributes: duplicate attribute '" +
                        p.attribute + "'");
    }
  }
  std::vector<AttributeScore> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back(score_image(
        image_embedding, p,
        {text_embeddings(p.positive_text), text_embeddings(p.negative_text)}));
  }
  return out;
}

CompareResult compare_images(const Embedding& embedding_a,
                             const Embedding& embedding_b,
                             const PromptPair& pair,
                             const std::pair<Embedding, Embedding>& text_embeddings) {
  CompareResult r;
  r.score_a = score_image(embedding_a, pair, text_embeddings);
  r.score_b = score_image(embedding_b, pair, text_embeddings);
  if (r.score_a.score == r.score_b.score) {
    r.label = CompareLabel::A;
    r.tie = true;
  } else {
    r.label = r.score_a.score > r.score_b.score ? CompareLabel::A
                                                : CompareLabel::B;
    r.tie = false;
  }
  return r;
}

}  // namespace percept

#include "percept/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "percept/errors.hpp"

namespace percept {

PairedSamples::PairedSamples(std::vector<double> preds,
                             std::vector<double> labs)
    : predictions(std::move(preds)), labels(std::move(labs)) {
  if (predictions.size() != labels.size()) {
    throw ContractViolation("paired samples: length mismatch (" +
                            std::to_string(predictions.size()) + " vs " +
                            std::to_string(labels.size()) + ")");
  }
  if (predictions.size() < 2) {
    throw ContractViolation("paired samples: need n >= 2");
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i]) || !std::isfinite(labels[i])) {
      throw ContractViolation("paired samples: non-finite value at row " +
                              std::to_string(i));
    }
  }
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw DegenerateInput("correlation: zero-variance series");
  }
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return values[i] < values[j];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) hold equal values; midrank of 1-based ranks.
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double plcc(const PairedSamples& samples) {
  return pearson(samples.predictions, samples.labels);
}

double srocc(const PairedSamples& samples) {
  const std::vector<double> ra = average_ranks(samples.predictions);
  const std::vector<double> rb = average_ranks(samples.labels);
  // Equal (or exactly reversed) rank vectors determine the result exactly;
  // returning the exact value keeps monotone sweeps at 1.0, not 1 - 1ulp.
  bool all_equal_a = true, all_equal_b = true;
  for (std::size_t i = 1; i < ra.size(); ++i) {
    if (ra[i] != ra[0]) all_equal_a = false;
    if (rb[i] != rb[0]) all_equal_b = false;
  }
  if (all_equal_a || all_equal_b) {
    throw DegenerateInput("srocc: all-equal series has no rank variance");
  }
  if (ra == rb) return 1.0;
  bool reversed = true;
  const double rank_sum = static_cast<double>(ra.size() + 1);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (ra[i] + rb[i] != rank_sum) {
      reversed = false;
      break;
    }
  }
  if (reversed) return -1.0;
  return pearson(ra, rb);
}

double pairwise_accuracy(const std::vector<Choice>& decisions,
                         const std::vector<Choice>& human_choices,
                         TiePolicy tie_policy) {
  if (decisions.size() != human_choices.size()) {
    throw ContractViolation("pairwise_accuracy: length mismatch");
  }
  if (decisions.empty()) {
    throw ContractViolation("pairwise_accuracy: empty input");
  }
  double credit = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (human_choices[i] == Choice::Tie) {
      throw ContractViolation("pairwise_accuracy: human choice must be A or B");
    }
    if (decisions[i] == Choice::Tie) {
      credit += tie_policy == TiePolicy::Half ? 0.5 : 0.0;
    } else if (decisions[i] == human_choices[i]) {
      credit += 1.0;
    }
  }
  return credit / static_cast<double>(decisions.size());
}

double level_correlation(
    const std::map<double, std::vector<double>>& scores_by_level) {
  if (scores_by_level.size() < 2) {
    throw InputError("level_correlation: need at least 2 levels");
  }
  std::vector<double> levels, means;
  for (const auto& [level, scores] : scores_by_level) {
    if (scores.empty()) {
      throw InputError("level_correlation: empty score list at a level");
    }
    levels.push_back(level);
    means.push_back(std::accumulate(scores.begin(), scores.end(), 0.0) /
                    static_cast<double>(scores.size()));
  }
  return srocc(PairedSamples(levels, means));
}

}  // namespace percept

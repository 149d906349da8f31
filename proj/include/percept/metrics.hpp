#pragma once

#include <map>
#include <vector>

namespace percept {

// Paired (prediction, label) series for correlation metrics.
// Validated on construction: equal lengths, n >= 2, all finite.
struct PairedSamples {
  PairedSamples(std::vector<double> preds, std::vector<double> labs);
  std::vector<double> predictions;
  std::vector<double> labels;
  int n() const { return static_cast<int>(predictions.size()); }
};

// Pearson linear correlation. Invariant under positive affine transforms of
// either series. Zero variance raises DegenerateInput.
double plcc(const PairedSamples& samples);

// Spearman rank-order correlation: Pearson on average ranks. Ties receive
// the mean of the ranks they span (the closed-form 6*sum(d^2) formula is
// invalid under ties and is not used). Invariant under strictly increasing
// transforms. All-equal series raise DegenerateInput.
double srocc(const PairedSamples& samples);

// Average ranks (1-based, ties get the midrank). Exposed for tests.
std::vector<double> average_ranks(const std::vector<double>& values);

enum class Choice { A, B, Tie };

enum class TiePolicy { Half, Zero };  // credit for a tie decision

// Fraction of decisions matching the human choice. Humans never answer Tie;
// a Tie decision earns 0.5 under TiePolicy::Half and 0 under Zero.
double pairwise_accuracy(const std::vector<Choice>& decisions,
                         const std::vector<Choice>& human_choices,
                         TiePolicy tie_policy = TiePolicy::Half);

// SROCC between degradation level and the mean score at that level.
// Summarizes sweep monotonicity; needs >= 2 levels, >= 1 score per level.
double level_correlation(
    const std::map<double, std::vector<double>>& scores_by_level);

}  // namespace percept

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "percept/backbone.hpp"
#include "percept/cache.hpp"
#include "percept/encoder.hpp"
#include "percept/image_io.hpp"
#include "percept/manifest.hpp"
#include "percept/metrics.hpp"
#include "percept/prompts.hpp"
#include "percept/scoring.hpp"
#include "percept/tuner.hpp"

namespace percept {

struct PerImageScore {
  std::string path;
  double score = 0.0;  // paired score (or s1 when scored naive)
  double s1 = 0.0;
  double s2 = 0.0;
  std::optional<double> mos;
};

struct EvalReport {
  std::string dataset;
  std::string prompt_id;  // prompt pair texts or tuned-context digest
  double srocc = 0.0;
  double plcc = 0.0;
  int n = 0;
  std::vector<PerImageScore> per_image;
  std::string config_fingerprint;
};

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);
void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);
std::string report_to_csv(const EvalReport& report);  // 3-decimal display

struct EvalOptions {
  Split split = Split::Test;
  std::string cache_dir;  // empty = no caching
  int workers = 1;
  // Rank by the raw positive-prompt cosine (the single-prompt baseline)
  // instead of the paired score.
  bool naive_single_prompt = false;
  ImageLoader loader = load_image;
};

// Scores every image on the evaluated split against the antonym pair and
// computes SROCC/PLCC against MOS. Uses the content-addressed cache when a
// cache_dir is set.
EvalReport eval_dataset(const DatasetManifest& manifest, const Encoder& encoder,
                        const PromptPair& pair, const EvalOptions& options = {});

// Same with a tuned context instead of plain text prompts.
EvalReport eval_dataset(const DatasetManifest& manifest, const Backbone& backbone,
                        const LearnableContext& context,
                        const EvalOptions& options = {});

struct Extremes {
  std::vector<PerImageScore> top;
  std::vector<PerImageScore> bottom;
};

// k highest- and k lowest-scoring rows, for grid rendering.
Extremes rank_extremes(const EvalReport& report, int k);

struct PairedCompareSummary {
  std::string attribute;
  // 25th/50th/75th percentiles per group.
  std::array<double, 3> low_quartiles{};
  std::array<double, 3> high_quartiles{};
  double win_fraction = 0.0;  // high > low, ties 0.5
  int n_pairs = 0;
};

// Scores the low- and high-quality manifests independently (row i of one
// pairs with row i of the other) and summarizes the separation.
PairedCompareSummary paired_benchmark_compare(const DatasetManifest& low,
                                              const DatasetManifest& high,
                                              const PromptPair& pair,
                                              const Encoder& encoder,
                                              const EvalOptions& options = {});

struct AblationCell {
  std::string manifest;
  std::string template_id;
  std::string preset;
  std::string backbone;  // label, e.g. "residual-attnpool/removed"
  double srocc = 0.0;
  double plcc = 0.0;
  std::string error;  // non-empty when the cell failed
};

using EncoderFactory =
    std::function<std::shared_ptr<const Encoder>(const std::string& label)>;

// One eval per (manifest x template x adjective preset x backbone label).
// A failing cell records its error and the run continues.
std::vector<AblationCell> ablation_matrix(
    const std::vector<std::string>& manifest_paths,
    const std::vector<TemplateId>& templates,
    const std::vector<std::string>& preset_ids,
    const std::vector<std::string>& backbone_labels,
    const EncoderFactory& encoder_factory, const EvalOptions& options = {});

std::string ablation_to_csv(const std::vector<AblationCell>& cells);

struct AttributeAccuracy {
  double accuracy = 0.0;
  int n_pairs = 0;
  int n_ties = 0;
};

// pairs_file csv: attribute,image_a,image_b
// votes_file csv: attribute,image_a,image_b,majority  (majority in {A,B})
// Runs compare_images per pair and scores against the human majorities.
std::map<std::string, AttributeAccuracy> abstract_pair_study(
    const std::string& pairs_file, const std::string& votes_file,
    const Encoder& encoder, const PromptRegistry& registry,
    const EvalOptions& options = {});

// Embeds the training split and runs the prompt tuner against MOS labels.
TuneResult run_prompt_tuning(const DatasetManifest& manifest,
                             const Backbone& backbone, const PromptPair& pair,
                             const TuneConfig& config,
                             const EvalOptions& options = {});

}  // namespace percept

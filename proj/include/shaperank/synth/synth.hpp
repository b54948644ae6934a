#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shaperank/btrank/btrank.hpp"
#include "shaperank/features/features.hpp"
#include "shaperank/forest/forest.hpp"
#include "shaperank/synth/generators.hpp"

namespace shaperank::synth {

// One pairwise product term in a planted utility.
struct Interaction {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

// Ground-truth preference utility. Defined on column z-scores of the feature
// matrix so that weight magnitudes are comparable across descriptors whose
// natural scales differ by orders of magnitude; the per-shape noise term is
// drawn once per shape, not per comparison.
struct UtilitySpec {
  std::vector<double> linear;            // one weight per feature; empty = all zero
  std::vector<Interaction> interactions;
  double noise_scale = 0.0;              // sd of the per-shape utility noise
};

// Throws InputError unless the spec is usable against `n_features` columns:
// linear weights (when present) match the column count, interaction indices
// are in range, noise_scale is finite and >= 0, and at least one of the
// weights or the noise scale is nonzero.
void validate_utility(const UtilitySpec& spec, int n_features);

// Column z-scores with population standard deviation. Columns whose spread is
// FP dust relative to their magnitude map to all-zero z-scores instead of
// amplified rounding noise.
std::vector<std::vector<double>> zscore_columns(
    const std::vector<std::vector<double>>& x);

// Utility per row: linear + interaction terms on the z-scored columns, plus
// noise_scale * N(0,1) drawn once per row from Rng(seed), in row order.
std::vector<double> planted_utilities(
    const std::vector<std::vector<double>>& features, const UtilitySpec& spec,
    std::uint64_t seed);

// Samples n comparisons: each draw picks a pair uniformly without replacement
// (i != j; repeats across draws allowed) and the winner is Bernoulli with the
// Bradley-Terry probability of the true utilities. Pair positions are keyed
// to the sorted id order, so reordering the (ids, utilities) rows jointly
// leaves the output stream identical. Requires >= 2 shapes with unique ids.
std::vector<bt::ComparisonRecord> simulate_comparisons(
    const std::vector<std::string>& ids, const std::vector<double>& utilities,
    int n, std::uint64_t seed, const std::string& category = "synthetic");

// Convenience overload: derives utilities from features + spec first.
std::vector<bt::ComparisonRecord> simulate_comparisons(
    const std::vector<std::string>& ids,
    const std::vector<std::vector<double>>& features, const UtilitySpec& spec,
    int n, std::uint64_t seed, const std::string& category = "synthetic");

// A mixed corpus cycling through the generator families with seeded knob
// values, plus the extracted descriptor matrix (row i belongs to ids[i]).
struct Corpus {
  std::vector<std::string> ids;
  std::vector<ShapeSpec> specs;
  std::vector<std::vector<double>> features;
  std::string category = "synthetic";
};

// Generation and extraction run parallel across shapes; output is
// schedule-independent. n_shapes >= 2. `families` is the cycle of generator
// kinds to draw from (empty = all five); restricting it to one family with
// independent knobs is how experiments decorrelate their driver features.
Corpus make_corpus(int n_shapes, std::uint64_t seed,
                   const feat::FeatureConfig& config = {},
                   const std::vector<Generator>& families = {});

// Knob sampling only: exactly the specs make_corpus would draw, without
// running feature extraction. Lets callers materialize the meshes themselves.
std::vector<ShapeSpec> draw_corpus_specs(int n_shapes, std::uint64_t seed,
                                         const std::vector<Generator>& families = {});

struct ExperimentConfig {
  int n_shapes = 40;
  int n_comparisons = 1500;
  UtilitySpec utility;
  feat::FeatureConfig features;
  bt::BTConfig bt;
  forest::ForestHyperparams forest;
  std::string category = "synthetic";
  std::vector<Generator> families;  // corpus family cycle; empty = all five

  // When non-empty, generation + extraction are skipped and these rows are
  // used as the corpus. Lets many seeded replicates share one extracted
  // corpus, which is the expensive stage.
  std::vector<std::string> ids;
  std::vector<std::vector<double>> feature_rows;
};

struct ExperimentReport {
  Corpus corpus;                  // specs empty when feature rows were supplied
  std::vector<double> utilities;  // planted ground truth per shape
  std::vector<bt::ComparisonRecord> comparisons;
  bt::BTFit fit;
  forest::Dataset dataset;  // features, fitted scores, inverse-count weights
  forest::ForestModel model;
  double spearman_fit_truth = 0.0;  // rank recovery of fitted scores vs truth
  double oob_r2 = 0.0;              // honest fit quality on out-of-bag rows
  std::map<std::string, double> shap_importance;  // mean |phi| per feature
  std::vector<std::string> shap_ranking;  // feature names, most important first
  std::map<std::string, double> pearson;  // linear scan against fitted scores
  std::string top_feature;                // shap_ranking.front()
  std::uint64_t seed = 0;
};

// Full oracle loop: generate -> extract -> simulate -> fit -> train ->
// explain. Deterministic in (config, seed); errors from any stage propagate.
ExperimentReport planted_driver_experiment(const ExperimentConfig& config,
                                           std::uint64_t seed);

}  // namespace shaperank::synth

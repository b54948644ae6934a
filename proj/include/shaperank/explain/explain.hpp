#pragma once

#include <map>
#include <string>
#include <vector>

#include "shaperank/forest/forest.hpp"

namespace shaperank::explain {

// Additive attribution of one prediction: base_value + sum(attributions)
// equals the model output (local accuracy).
struct ShapExplanation {
  std::vector<double> attributions;  // aligned with model.feature_names
  double base_value = 0.0;
  double prediction = 0.0;
};

// Exact Shapley values for the cover-weighted tree game, computed per tree in
// polynomial time and averaged across the ensemble.
ShapExplanation tree_shap(const forest::ForestModel& model,
                          const std::vector<double>& x);
std::vector<ShapExplanation> tree_shap_batch(
    const forest::ForestModel& model, const std::vector<std::vector<double>>& x);

// Mean absolute attribution per feature over the given rows. Accumulation is
// order-independent, so permuting rows changes nothing, bit for bit.
std::map<std::string, double> global_importance(
    const forest::ForestModel& model, const std::vector<std::vector<double>>& x);

struct PdpCurve {
  std::string feature;
  std::vector<double> grid;      // strictly increasing feature values
  std::vector<double> response;  // mean prediction with the feature clamped
};

// Grid points sit at equally spaced quantiles of the observed column; repeated
// quantiles collapse, and a constant column is rejected.
PdpCurve partial_dependence(const forest::ForestModel& model,
                            const std::vector<std::vector<double>>& x,
                            int feature, int grid_size = 20);

// Pearson r of each feature column against the target. Zero-variance columns
// are omitted from the result rather than reported as NaN.
std::map<std::string, double> pearson_feature_scan(const forest::Dataset& dataset);

}  // namespace shaperank::explain

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shaperank/btrank/btrank.hpp"

namespace shaperank::forest {

// Regression dataset: one row per shape, columns in a fixed feature order.
// Weights compensate for unequal comparison counts per shape.
struct Dataset {
  std::vector<std::string> shape_ids;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> x;  // row-major, x[row][feature]
  std::vector<double> y;
  std::vector<double> weights;  // all 1.0 if empty at validate() time
  std::string category;

  int n_rows() const { return static_cast<int>(x.size()); }
  int n_features() const { return static_cast<int>(feature_names.size()); }

  // Throws InputError on ragged rows, size mismatches, duplicate shape ids,
  // non-positive weights, or non-finite entries. Fills unit weights if empty.
  void validate();
};

// Per-shape inverse-count weights derived from raw comparison records.
struct WeightReport {
  std::map<std::string, double> weights;  // id -> 1 / max(n_i, 1)
  std::map<std::string, int> counts;      // id -> n_i
  std::vector<std::string> zero_comparison_ids;
};

// Counts appearances as winner or loser. Ids present in `universe` but in no
// record get weight 1 and are flagged in zero_comparison_ids.
WeightReport comparison_weights(const std::vector<bt::ComparisonRecord>& records,
                                const std::vector<std::string>& universe = {});

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;   // weighted mean of y over training rows in the node
  double cover = 0.0;   // total training weight reaching the node
  int n_samples = 0;    // bootstrap sample count reaching the node
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const std::vector<double>& x) const;
};

struct ForestHyperparams {
  int n_trees = 300;
  int max_depth = -1;         // -1 = unlimited
  int min_samples_leaf = 1;
  int max_features = -1;      // candidate features per split; -1 = ceil(p / 3)

  friend bool operator==(const ForestHyperparams&, const ForestHyperparams&) = default;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestHyperparams params;
  uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> training_ids;        // row order used at fit time
  std::vector<std::vector<int>> bootstrap_counts;  // per tree, per training row
  std::string category;

  int n_features() const { return static_cast<int>(feature_names.size()); }
};

// Single CART regression tree on an explicit bootstrap (multiplicity per row,
// aligned with dataset rows). The seed drives per-split feature subsampling.
Tree train_tree(const Dataset& dataset, const ForestHyperparams& params,
                const std::vector<int>& bootstrap_count, uint64_t seed);

// Bagged ensemble. Bootstrap draws are keyed by (seed, tree index, shape id),
// so reordering dataset rows changes nothing about the fitted model.
ForestModel train_forest(const Dataset& dataset, const ForestHyperparams& params,
                         uint64_t seed);
ForestModel train_forest_serial(const Dataset& dataset,
                                const ForestHyperparams& params, uint64_t seed);

double predict(const ForestModel& model, const std::vector<double>& x);
std::vector<double> predict_batch(const ForestModel& model,
                                  const std::vector<std::vector<double>>& x);

// R^2 = 1 - SS_res / SS_tot. Throws InputError when y_true has zero variance.
double r2(const std::vector<double>& y_true, const std::vector<double>& y_pred);
// Mean absolute error, optionally weighted (weights need not be normalized).
double mae(const std::vector<double>& y_true, const std::vector<double>& y_pred,
           const std::vector<double>& weights = {});

// R^2 of out-of-bag aggregated predictions over rows left out by at least one
// tree. Requires the dataset the model was trained on (matched by shape ids).
double oob_score(const ForestModel& model, const Dataset& dataset);

struct CvReport {
  std::vector<std::pair<ForestHyperparams, double>> scores;  // grid point -> mean CV R^2
  ForestHyperparams best;
  double best_score = 0.0;
  std::vector<int> fold_assignment;  // per dataset row, in dataset row order
  int k = 5;
  uint64_t seed = 42;
};

std::vector<ForestHyperparams> default_grid();

// Exhaustive grid evaluation with seeded k-fold assignment. Ties on the mean
// CV R^2 break toward smaller (n_trees, max_depth, min_samples_leaf), with
// unlimited depth ordered after every finite depth.
CvReport grid_search_cv(const Dataset& dataset,
                        const std::vector<ForestHyperparams>& grid, int k = 5,
                        uint64_t seed = 42);

struct TransferReport {
  double transfer_r2 = 0.0;   // model applied to the other category's rows
  double within_cv_r2 = 0.0;  // 5-fold CV on the target data, same hyperparams
  double drop = 0.0;          // within_cv_r2 - transfer_r2
  bool self_transfer = false;
};

// Applies a trained model to another category's dataset. When the target rows
// are exactly the model's own training rows, transfer_r2 switches to the
// out-of-bag estimate so the comparison against CV stays honest.
TransferReport transfer_evaluate(const ForestModel& model, const Dataset& target);

// Self-describing JSON round trip (trees, hyperparams, seed, feature names,
// bootstrap record). Deserialized models predict bit-identically.
std::string serialize_model(const ForestModel& model);
ForestModel deserialize_model(const std::string& text);

}  // namespace shaperank::forest

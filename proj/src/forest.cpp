#include "shaperank/forest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "shaperank/core/error.hpp"
#include "shaperank/core/rng.hpp"

namespace shaperank::forest {

namespace {

// Minimum relative variance reduction for a split to be worth keeping.
constexpr double kMinGainFraction = 1e-12;

bool finite(double v) { return std::isfinite(v); }

// Rows sorted by shape id. Bootstrap draws, fold striping and every
// accumulation run in this order, so row order in the input never matters.
std::vector<int> canonical_order(const std::vector<std::string>& ids) {
  std::vector<int> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ids[static_cast<size_t>(a)] < ids[static_cast<size_t>(b)];
  });
  for (size_t i = 1; i < order.size(); ++i)
    if (ids[static_cast<size_t>(order[i - 1])] == ids[static_cast<size_t>(order[i])])
      throw InputError("duplicate shape id in dataset: " +
                       ids[static_cast<size_t>(order[i])]);
  return order;
}

struct CanonicalView {
  std::vector<int> order;                 // canonical position -> original row
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  std::vector<double> w;  // scaled so the first canonical weight is exactly 1
};

CanonicalView canonicalize(const Dataset& d) {
  CanonicalView v;
  v.order = canonical_order(d.shape_ids);
  const size_t n = v.order.size();
  v.x.resize(n);
  v.y.resize(n);
  v.w.resize(n);
  for (size_t c = 0; c < n; ++c) {
    const size_t r = static_cast<size_t>(v.order[c]);
    v.x[c] = d.x[r];
    v.y[c] = d.y[r];
    v.w[c] = d.weights[r];
  }
  // Common-scale normalization: with all-equal weights every entry becomes
  // exactly 1.0, making weighted and unweighted training bit-identical.
  const double scale = v.w[0];
  for (double& w : v.w) w /= scale;
  return v;
}

void validate_params(const ForestHyperparams& p, int n_features) {
  if (p.n_trees < 1) throw InputError("n_trees must be >= 1");
  if (p.max_depth < -1) throw InputError("max_depth must be -1 (unlimited) or >= 0");
  if (p.min_samples_leaf < 1) throw InputError("min_samples_leaf must be >= 1");
  if (p.max_features != -1 && (p.max_features < 1 || p.max_features > n_features))
    throw InputError("max_features out of range");
}

int resolved_mtry(const ForestHyperparams& p, int n_features) {
  if (p.max_features != -1) return p.max_features;
  return (n_features + 2) / 3;  // ceil(p / 3)
}

// CART builder over (row, multiplicity) items held in canonical row order.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x,
              const std::vector<double>& y, const std::vector<double>& w,
              const ForestHyperparams& params, int n_features, Rng& rng)
      : x_(x), y_(y), w_(w), params_(params), p_(n_features),
        mtry_(resolved_mtry(params, n_features)), rng_(rng) {}

  Tree build(const std::vector<std::pair<int, int>>& items) {
    Tree tree;
    nodes_ = &tree.nodes;
    grow(items, 0);
    return tree;
  }

 private:
  struct NodeStats {
    double weight = 0.0;   // sum of w * mult
    double mean = 0.0;
    double sse = 0.0;      // weighted sum of squared residuals
    int samples = 0;       // sum of mult
    bool constant_y = true;
  };

  NodeStats stats(const std::vector<std::pair<int, int>>& items) const {
    NodeStats s;
    double s1 = 0.0;
    const double first_y = y_[static_cast<size_t>(items.front().first)];
    for (const auto& [row, mult] : items) {
      const double wm = w_[static_cast<size_t>(row)] * mult;
      s.weight += wm;
      s1 += wm * y_[static_cast<size_t>(row)];
      s.samples += mult;
      if (y_[static_cast<size_t>(row)] != first_y) s.constant_y = false;
    }
    s.mean = s1 / s.weight;
    for (const auto& [row, mult] : items) {
      const double r = y_[static_cast<size_t>(row)] - s.mean;
      s.sse += w_[static_cast<size_t>(row)] * mult * r * r;
    }
    return s;
  }

  int grow(const std::vector<std::pair<int, int>>& items, int depth) {
    const NodeStats s = stats(items);
    const int index = static_cast<int>(nodes_->size());
    nodes_->push_back({});
    TreeNode& placeholder = nodes_->back();
    placeholder.value = s.mean;
    placeholder.cover = s.weight;
    placeholder.n_samples = s.samples;

    const bool depth_ok = params_.max_depth < 0 || depth < params_.max_depth;
    if (!depth_ok || s.constant_y || s.samples < 2 * params_.min_samples_leaf)
      return index;

    // Candidate features for this split, sorted ascending.
    const std::vector<int> features =
        mtry_ >= p_ ? all_features() : rng_.sample_without_replacement(p_, mtry_);

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (const int f : features)
      scan_feature(items, s, f, best_gain, best_feature, best_threshold);

    if (best_feature < 0 || best_gain <= kMinGainFraction * s.sse) return index;

    std::vector<std::pair<int, int>> left, right;
    for (const auto& item : items) {
      if (x_[static_cast<size_t>(item.first)][static_cast<size_t>(best_feature)] <=
          best_threshold)
        left.push_back(item);
      else
        right.push_back(item);
    }
    const int li = grow(left, depth + 1);
    const int ri = grow(right, depth + 1);
    TreeNode& node = (*nodes_)[static_cast<size_t>(index)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = li;
    node.right = ri;
    return index;
  }

  void scan_feature(const std::vector<std::pair<int, int>>& items,
                    const NodeStats& s, int f, double& best_gain,
                    int& best_feature, double& best_threshold) const {
    std::vector<std::pair<int, int>> sorted = items;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
      const double va = x_[static_cast<size_t>(a.first)][static_cast<size_t>(f)];
      const double vb = x_[static_cast<size_t>(b.first)][static_cast<size_t>(f)];
      if (va != vb) return va < vb;
      return a.first < b.first;
    });
    double l0 = 0.0, l1 = 0.0, l2 = 0.0;
    double t0 = 0.0, t1 = 0.0, t2 = 0.0;
    for (const auto& [row, mult] : sorted) {
      const double wm = w_[static_cast<size_t>(row)] * mult;
      const double yv = y_[static_cast<size_t>(row)];
      t0 += wm;
      t1 += wm * yv;
      t2 += wm * yv * yv;
    }
    int left_samples = 0;
    for (size_t i = 0; i + 1 < sorted.size(); ++i) {
      const auto& [row, mult] = sorted[i];
      const double wm = w_[static_cast<size_t>(row)] * mult;
      const double yv = y_[static_cast<size_t>(row)];
      l0 += wm;
      l1 += wm * yv;
      l2 += wm * yv * yv;
      left_samples += mult;
      const double vi = x_[static_cast<size_t>(row)][static_cast<size_t>(f)];
      const double vn = x_[static_cast<size_t>(sorted[i + 1].first)][static_cast<size_t>(f)];
      if (vi == vn) continue;  // can only cut between distinct values
      if (left_samples < params_.min_samples_leaf) continue;
      if (s.samples - left_samples < params_.min_samples_leaf) continue;
      const double sse_left = std::max(0.0, l2 - l1 * l1 / l0);
      const double r0 = t0 - l0, r1 = t1 - l1, r2 = t2 - l2;
      const double sse_right = r0 > 0.0 ? std::max(0.0, r2 - r1 * r1 / r0) : 0.0;
      const double gain = s.sse - sse_left - sse_right;
      if (gain > best_gain) {
        double threshold = vi + (vn - vi) / 2.0;
        if (!(threshold < vn)) threshold = vi;  // rounding hit the upper value
        best_gain = gain;
        best_feature = f;
        best_threshold = threshold;
      }
    }
  }

  std::vector<int> all_features() const {
    std::vector<int> f(static_cast<size_t>(p_));
    std::iota(f.begin(), f.end(), 0);
    return f;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& y_;
  const std::vector<double>& w_;
  ForestHyperparams params_;
  int p_;
  int mtry_;
  Rng& rng_;
  std::vector<TreeNode>* nodes_ = nullptr;
};

std::vector<std::pair<int, int>> items_from_counts(const std::vector<int>& counts) {
  std::vector<std::pair<int, int>> items;
  for (size_t r = 0; r < counts.size(); ++r)
    if (counts[r] > 0) items.push_back({static_cast<int>(r), counts[r]});
  return items;
}

ForestModel train_forest_impl(const Dataset& input, const ForestHyperparams& params,
                              uint64_t seed, bool parallel) {
  Dataset d = input;
  d.validate();
  validate_params(params, d.n_features());
  if (d.n_rows() == 0) throw InputError("cannot train a forest on an empty dataset");

  const CanonicalView view = canonicalize(d);
  const int n = d.n_rows();

  ForestModel model;
  model.params = params;
  model.seed = seed;
  model.feature_names = d.feature_names;
  model.training_ids = d.shape_ids;
  model.category = d.category;
  model.trees.resize(static_cast<size_t>(params.n_trees));
  model.bootstrap_counts.assign(static_cast<size_t>(params.n_trees),
                                std::vector<int>(static_cast<size_t>(n), 0));

  std::exception_ptr failure = nullptr;
  const long long n_trees = params.n_trees;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long t = 0; t < n_trees; ++t) {
    try {
      Rng rng(derive_stream(seed, static_cast<uint64_t>(t)));
      std::vector<int> counts(static_cast<size_t>(n), 0);
      for (int draw = 0; draw < n; ++draw)
        ++counts[static_cast<size_t>(rng.bounded(static_cast<uint64_t>(n)))];
      TreeBuilder builder(view.x, view.y, view.w, params, d.n_features(), rng);
      model.trees[static_cast<size_t>(t)] = builder.build(items_from_counts(counts));
      auto& stored = model.bootstrap_counts[static_cast<size_t>(t)];
      for (int c = 0; c < n; ++c)
        stored[static_cast<size_t>(view.order[static_cast<size_t>(c)])] =
            counts[static_cast<size_t>(c)];
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return model;
}

double mean_cv_r2(const Dataset& d, const ForestHyperparams& params,
                  const std::vector<int>& fold_assignment, int k, uint64_t seed,
                  uint64_t stream_base) {
  // Partitions are assembled in id-sorted order so every downstream sum runs
  // over the same sequence no matter how the caller ordered the rows.
  const std::vector<int> canon = canonical_order(d.shape_ids);
  double total = 0.0;
  for (int fold = 0; fold < k; ++fold) {
    Dataset train, test;
    train.feature_names = test.feature_names = d.feature_names;
    train.category = test.category = d.category;
    for (const int r : canon) {
      Dataset& part = fold_assignment[static_cast<size_t>(r)] == fold ? test : train;
      part.shape_ids.push_back(d.shape_ids[static_cast<size_t>(r)]);
      part.x.push_back(d.x[static_cast<size_t>(r)]);
      part.y.push_back(d.y[static_cast<size_t>(r)]);
      part.weights.push_back(d.weights[static_cast<size_t>(r)]);
    }
    if (train.n_rows() == 0 || test.n_rows() == 0)
      throw InputError("degenerate fold: empty train or test partition");
    const ForestModel m = train_forest_impl(
        train, params, derive_stream(seed, stream_base + static_cast<uint64_t>(fold)),
        true);
    double score = 0.0;
    try {
      score = r2(test.y, predict_batch(m, test.x));
    } catch (const InputError&) {
      throw InputError("degenerate fold: held-out targets have zero variance");
    }
    total += score;
  }
  return total / k;
}

// Sort key that puts unlimited depth after every finite depth.
std::tuple<int, long long, int> tie_key(const ForestHyperparams& p) {
  const long long depth = p.max_depth < 0
                              ? std::numeric_limits<long long>::max()
                              : static_cast<long long>(p.max_depth);
  return {p.n_trees, depth, p.min_samples_leaf};
}

}  // namespace

void Dataset::validate() {
  const size_t n = x.size();
  if (shape_ids.size() != n || y.size() != n)
    throw InputError("dataset row counts disagree across ids, features and targets");
  if (weights.empty()) weights.assign(n, 1.0);
  if (weights.size() != n)
    throw InputError("dataset weights length does not match the row count");
  const size_t p = feature_names.size();
  if (p == 0) throw InputError("dataset has no feature columns");
  for (size_t r = 0; r < n; ++r) {
    if (x[r].size() != p)
      throw InputError("dataset row " + shape_ids[r] + " has the wrong feature count");
    for (double v : x[r])
      if (!finite(v)) throw InputError("non-finite feature value in row " + shape_ids[r]);
    if (!finite(y[r])) throw InputError("non-finite target in row " + shape_ids[r]);
    if (!finite(weights[r]) || weights[r] <= 0.0)
      throw InputError("weights must be positive and finite (row " + shape_ids[r] + ")");
  }
  canonical_order(shape_ids);  // throws on duplicate ids
}

WeightReport comparison_weights(const std::vector<bt::ComparisonRecord>& records,
                                const std::vector<std::string>& universe) {
  WeightReport report;
  for (const auto& rec : records) {
    ++report.counts[rec.winner];
    ++report.counts[rec.loser];
  }
  for (const auto& id : universe) report.counts.emplace(id, 0);
  for (const auto& [id, n] : report.counts) {
    report.weights[id] = 1.0 / std::max(n, 1);
    if (n == 0) report.zero_comparison_ids.push_back(id);
  }
  return report;
}

double Tree::predict(const std::vector<double>& x) const {
  int i = 0;
  while (nodes[static_cast<size_t>(i)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<size_t>(i)];
    i = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(i)].value;
}

Tree train_tree(const Dataset& dataset, const ForestHyperparams& params,
                const std::vector<int>& bootstrap_count, uint64_t seed) {
  Dataset d = dataset;
  d.validate();
  validate_params(params, d.n_features());
  if (bootstrap_count.size() != static_cast<size_t>(d.n_rows()))
    throw InputError("bootstrap counts must align with dataset rows");
  const auto items = items_from_counts(bootstrap_count);
  if (items.empty()) throw InputError("bootstrap sample is empty");
  Rng rng(seed);
  TreeBuilder builder(d.x, d.y, d.weights, params, d.n_features(), rng);
  return builder.build(items);
}

ForestModel train_forest(const Dataset& dataset, const ForestHyperparams& params,
                         uint64_t seed) {
  return train_forest_impl(dataset, params, seed, true);
}

ForestModel train_forest_serial(const Dataset& dataset,
                                const ForestHyperparams& params, uint64_t seed) {
  return train_forest_impl(dataset, params, seed, false);
}

double predict(const ForestModel& model, const std::vector<double>& x) {
  if (x.size() != static_cast<size_t>(model.n_features()))
    throw InputError("feature vector length does not match the trained model");
  if (model.trees.empty()) throw InputError("model has no trees");
  double sum = 0.0;
  for (const Tree& t : model.trees) sum += t.predict(x);
  return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_batch(const ForestModel& model,
                                  const std::vector<std::vector<double>>& x) {
  std::vector<double> out(x.size(), 0.0);
  for (size_t i = 0; i < x.size(); ++i) out[i] = predict(model, x[i]);
  return out;
}

double r2(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw InputError("r2 needs equal-length, non-empty inputs");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot <= 0.0)
    throw InputError("r2 undefined: targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double mae(const std::vector<double>& y_true, const std::vector<double>& y_pred,
           const std::vector<double>& weights) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw InputError("mae needs equal-length, non-empty inputs");
  if (!weights.empty() && weights.size() != y_true.size())
    throw InputError("mae weights length does not match the inputs");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w <= 0.0 || !finite(w)) throw InputError("mae weights must be positive");
    num += w * std::abs(y_true[i] - y_pred[i]);
    den += w;
  }
  return num / den;
}

double oob_score(const ForestModel& model, const Dataset& dataset) {
  Dataset d = dataset;
  d.validate();
  if (d.shape_ids != model.training_ids)
    throw InputError("out-of-bag scoring needs the exact training dataset");
  if (model.bootstrap_counts.size() != model.trees.size())
    throw InputError("model is missing its bootstrap record");
  std::vector<double> truth, agg;
  for (int r = 0; r < d.n_rows(); ++r) {
    double sum = 0.0;
    int n_oob = 0;
    for (size_t t = 0; t < model.trees.size(); ++t) {
      if (model.bootstrap_counts[t][static_cast<size_t>(r)] != 0) continue;
      sum += model.trees[t].predict(d.x[static_cast<size_t>(r)]);
      ++n_oob;
    }
    if (n_oob == 0) continue;
    truth.push_back(d.y[static_cast<size_t>(r)]);
    agg.push_back(sum / n_oob);
  }
  if (truth.empty())
    throw InputError("no out-of-bag rows: every tree saw every sample");
  return r2(truth, agg);
}

std::vector<ForestHyperparams> default_grid() {
  std::vector<ForestHyperparams> grid;
  for (int n_trees : {100, 300, 500})
    for (int max_depth : {4, 8, 16, -1})
      for (int min_leaf : {1, 3, 5})
        grid.push_back({n_trees, max_depth, min_leaf, -1});
  return grid;
}

CvReport grid_search_cv(const Dataset& dataset,
                        const std::vector<ForestHyperparams>& grid, int k,
                        uint64_t seed) {
  Dataset d = dataset;
  d.validate();
  if (grid.empty()) throw InputError("hyperparameter grid is empty");
  if (k < 2) throw InputError("cross-validation needs k >= 2");
  if (d.n_rows() < k) throw InputError("fewer rows than folds");

  CvReport report;
  report.k = k;
  report.seed = seed;

  // Striped folds over a seeded shuffle of the id-sorted rows, so the
  // assignment is a function of shape ids rather than row positions.
  std::vector<int> canon = canonical_order(d.shape_ids);
  Rng rng(seed);
  rng.shuffle(canon);
  report.fold_assignment.assign(static_cast<size_t>(d.n_rows()), 0);
  for (size_t pos = 0; pos < canon.size(); ++pos)
    report.fold_assignment[static_cast<size_t>(canon[pos])] =
        static_cast<int>(pos % static_cast<size_t>(k));

  bool have_best = false;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    validate_params(grid[gi], d.n_features());
    const double score =
        mean_cv_r2(d, grid[gi], report.fold_assignment, k, seed,
                   gi * static_cast<uint64_t>(k) + 1);
    report.scores.push_back({grid[gi], score});
    const bool better =
        !have_best || score > report.best_score ||
        (score == report.best_score && tie_key(grid[gi]) < tie_key(report.best));
    if (better) {
      report.best = grid[gi];
      report.best_score = score;
      have_best = true;
    }
  }
  return report;
}

TransferReport transfer_evaluate(const ForestModel& model, const Dataset& target) {
  Dataset d = target;
  d.validate();
  if (d.feature_names != model.feature_names)
    throw InputError("feature schema mismatch between model and target dataset");

  TransferReport report;
  const std::multiset<std::string> a(model.training_ids.begin(), model.training_ids.end());
  const std::multiset<std::string> b(d.shape_ids.begin(), d.shape_ids.end());
  report.self_transfer = a == b;

  if (report.self_transfer) {
    // Scoring a model on its own training rows would just reward memorization;
    // the out-of-bag aggregate is the honest counterpart of the CV number.
    Dataset aligned;
    aligned.feature_names = d.feature_names;
    aligned.category = d.category;
    std::map<std::string, int> row_of;
    for (int r = 0; r < d.n_rows(); ++r) row_of[d.shape_ids[static_cast<size_t>(r)]] = r;
    for (const auto& id : model.training_ids) {
      const size_t r = static_cast<size_t>(row_of.at(id));
      aligned.shape_ids.push_back(d.shape_ids[r]);
      aligned.x.push_back(d.x[r]);
      aligned.y.push_back(d.y[r]);
      aligned.weights.push_back(d.weights[r]);
    }
    report.transfer_r2 = oob_score(model, aligned);
  } else {
    report.transfer_r2 = r2(d.y, predict_batch(model, d.x));
  }

  const CvReport cv = grid_search_cv(d, {model.params}, 5, 42);
  report.within_cv_r2 = cv.best_score;
  report.drop = report.within_cv_r2 - report.transfer_r2;
  return report;
}

std::string serialize_model(const ForestModel& model) {
  nlohmann::json doc;
  doc["format"] = "shaperank-forest-v1";
  doc["seed"] = model.seed;
  doc["category"] = model.category;
  doc["feature_names"] = model.feature_names;
  doc["training_ids"] = model.training_ids;
  doc["hyperparams"] = {{"n_trees", model.params.n_trees},
                        {"max_depth", model.params.max_depth},
                        {"min_samples_leaf", model.params.min_samples_leaf},
                        {"max_features", model.params.max_features}};
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes)
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"cover", n.cover},
                       {"n_samples", n.n_samples}});
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  doc["bootstrap_counts"] = model.bootstrap_counts;
  return doc.dump(2);
}

ForestModel deserialize_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid model JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "shaperank-forest-v1")
      throw InputError("unrecognized model format tag");
    ForestModel model;
    model.seed = doc.at("seed").get<uint64_t>();
    model.category = doc.value("category", std::string());
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.training_ids = doc.at("training_ids").get<std::vector<std::string>>();
    const auto& hp = doc.at("hyperparams");
    model.params.n_trees = hp.at("n_trees").get<int>();
    model.params.max_depth = hp.at("max_depth").get<int>();
    model.params.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
    model.params.max_features = hp.at("max_features").get<int>();
    for (const auto& tj : doc.at("trees")) {
      Tree tree;
      for (const auto& nj : tj) {
        TreeNode n;
        n.feature = nj.at("feature").get<int>();
        n.threshold = nj.at("threshold").get<double>();
        n.left = nj.at("left").get<int>();
        n.right = nj.at("right").get<int>();
        n.value = nj.at("value").get<double>();
        n.cover = nj.at("cover").get<double>();
        n.n_samples = nj.at("n_samples").get<int>();
        tree.nodes.push_back(n);
      }
      if (tree.nodes.empty()) throw InputError("model JSON contains an empty tree");
      model.trees.push_back(std::move(tree));
    }
    model.bootstrap_counts =
        doc.value("bootstrap_counts", std::vector<std::vector<int>>{});
    if (model.trees.empty()) throw InputError("model JSON contains no trees");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model JSON is missing fields: ") + e.what());
  }
}

}  // namespace shaperank::forest

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shaperank/core/error.hpp"
#include "shaperank/core/rng.hpp"
#include "shaperank/forest/forest.hpp"

using namespace shaperank;
using forest::Dataset;
using forest::ForestHyperparams;
using forest::ForestModel;

namespace {

std::string rid(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "r%03d", i);
  return buf;
}

std::vector<std::string> feature_names(int p) {
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

// Uniform(-1, 1) feature table with unit weights and zero targets.
Dataset make_table(int n, int p, uint64_t seed) {
  Dataset d;
  d.feature_names = feature_names(p);
  d.category = "synthetic";
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    d.shape_ids.push_back(rid(i));
    std::vector<double> row(static_cast<size_t>(p));
    for (double& v : row) v = 2.0 * rng.uniform01() - 1.0;
    d.x.push_back(row);
    d.y.push_back(0.0);
    d.weights.push_back(1.0);
  }
  return d;
}

void set_linear_target(Dataset& d, int j, double coef, double noise_sd,
                       uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < d.n_rows(); ++i)
    d.y[static_cast<size_t>(i)] =
        coef * d.x[static_cast<size_t>(i)][static_cast<size_t>(j)] +
        noise_sd * rng.normal();
}

void set_interaction_target(Dataset& d, int a, int b) {
  for (int i = 0; i < d.n_rows(); ++i)
    d.y[static_cast<size_t>(i)] = d.x[static_cast<size_t>(i)][static_cast<size_t>(a)] *
                                  d.x[static_cast<size_t>(i)][static_cast<size_t>(b)];
}

std::pair<Dataset, Dataset> split_rows(const Dataset& d, int n_train) {
  Dataset train, test;
  train.feature_names = test.feature_names = d.feature_names;
  train.category = test.category = d.category;
  for (int i = 0; i < d.n_rows(); ++i) {
    Dataset& part = i < n_train ? train : test;
    part.shape_ids.push_back(d.shape_ids[static_cast<size_t>(i)]);
    part.x.push_back(d.x[static_cast<size_t>(i)]);
    part.y.push_back(d.y[static_cast<size_t>(i)]);
    part.weights.push_back(d.weights[static_cast<size_t>(i)]);
  }
  return {train, test};
}

double linear_regression_r2(const Dataset& train, const Dataset& test) {
  const int p = train.n_features();
  Eigen::MatrixXd a(train.n_rows(), p + 1);
  Eigen::VectorXd b(train.n_rows());
  for (int i = 0; i < train.n_rows(); ++i) {
    a(i, 0) = 1.0;
    for (int j = 0; j < p; ++j) a(i, j + 1) = train.x[static_cast<size_t>(i)][static_cast<size_t>(j)];
    b(i) = train.y[static_cast<size_t>(i)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  std::vector<double> pred(static_cast<size_t>(test.n_rows()));
  for (int i = 0; i < test.n_rows(); ++i) {
    double v = coef(0);
    for (int j = 0; j < p; ++j)
      v += coef(j + 1) * test.x[static_cast<size_t>(i)][static_cast<size_t>(j)];
    pred[static_cast<size_t>(i)] = v;
  }
  return forest::r2(test.y, pred);
}

}  // namespace

TEST_CASE("comparison weights follow inverse counts") {
  std::vector<bt::ComparisonRecord> recs = {
      {"a", "b", ""}, {"a", "b", ""}, {"b", "a", ""}, {"a", "c", ""}};
  auto report = forest::comparison_weights(recs, {"a", "b", "c", "ghost"});
  CHECK(report.counts.at("a") == 4);
  CHECK(report.weights.at("a") == 0.25);
  CHECK(report.counts.at("b") == 3);
  CHECK(report.weights.at("b") == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(report.weights.at("c") == 1.0);
  CHECK(report.weights.at("ghost") == 1.0);
  REQUIRE(report.zero_comparison_ids.size() == 1);
  CHECK(report.zero_comparison_ids[0] == "ghost");

  // All-equal counts give all-equal weights.
  std::vector<bt::ComparisonRecord> even = {{"x", "y", ""}, {"y", "x", ""}};
  auto balanced = forest::comparison_weights(even);
  CHECK(balanced.weights.at("x") == balanced.weights.at("y"));
  CHECK(balanced.zero_comparison_ids.empty());
}

TEST_CASE("tree: constant targets collapse to a single leaf") {
  Dataset d = make_table(25, 4, 11);
  for (double& v : d.y) v = 3.25;
  std::vector<int> counts(25, 1);
  ForestHyperparams hp;
  hp.max_features = 4;
  auto tree = forest::train_tree(d, hp, counts, 7);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].feature == -1);
  CHECK(tree.nodes[0].value == 3.25);
  CHECK(tree.nodes[0].n_samples == 25);
}

TEST_CASE("tree: step target splits feature 0 inside the gap, matching an "
          "exhaustive gain scan") {
  const double step_at = 0.35;
  Dataset d = make_table(60, 5, 21);
  for (int i = 0; i < d.n_rows(); ++i) {
    d.x[static_cast<size_t>(i)][0] = Rng(100 + static_cast<uint64_t>(i)).uniform01();
    d.y[static_cast<size_t>(i)] = d.x[static_cast<size_t>(i)][0] > step_at ? 2.0 : -1.0;
  }
  ForestHyperparams hp;
  hp.max_features = 5;
  hp.max_depth = 1;
  std::vector<int> counts(60, 1);
  auto tree = forest::train_tree(d, hp, counts, 3);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 0);

  // The gap around the step: largest x0 below it, smallest above it.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < d.n_rows(); ++i) {
    const double v = d.x[static_cast<size_t>(i)][0];
    if (v <= step_at) lo = std::max(lo, v);
    else hi = std::min(hi, v);
  }
  CHECK(tree.nodes[0].threshold > lo - 1e-12);
  CHECK(tree.nodes[0].threshold < hi);

  // Independent exhaustive scan over every feature and every midpoint.
  auto sse_of = [&](const std::vector<int>& rows) {
    if (rows.empty()) return 0.0;
    double mean = 0.0;
    for (int r : rows) mean += d.y[static_cast<size_t>(r)];
    mean /= static_cast<double>(rows.size());
    double sse = 0.0;
    for (int r : rows) {
      const double e = d.y[static_cast<size_t>(r)] - mean;
      sse += e * e;
    }
    return sse;
  };
  std::vector<int> all(60);
  for (int i = 0; i < 60; ++i) all[static_cast<size_t>(i)] = i;
  double best_gain = -1.0;
  int best_f = -1;
  double best_t = 0.0;
  const double parent = sse_of(all);
  for (int f = 0; f < 5; ++f) {
    std::vector<double> vals;
    for (int i = 0; i < 60; ++i)
      vals.push_back(d.x[static_cast<size_t>(i)][static_cast<size_t>(f)]);
    std::sort(vals.begin(), vals.end());
    for (size_t i = 0; i + 1 < vals.size(); ++i) {
      if (vals[i] == vals[i + 1]) continue;
      const double t = vals[i] + (vals[i + 1] - vals[i]) / 2.0;
      std::vector<int> left, right;
      for (int r = 0; r < 60; ++r)
        (d.x[static_cast<size_t>(r)][static_cast<size_t>(f)] <= t ? left : right).push_back(r);
      const double gain = parent - sse_of(left) - sse_of(right);
      if (gain > best_gain) {
        best_gain = gain;
        best_f = f;
        best_t = t;
      }
    }
  }
  CHECK(best_f == tree.nodes[0].feature);
  CHECK(best_t == doctest::Approx(tree.nodes[0].threshold).epsilon(1e-12));
}

TEST_CASE("tree: depth zero yields the weighted mean, respecting multiplicity") {
  Dataset d;
  d.feature_names = feature_names(2);
  d.shape_ids = {"a", "b", "c"};
  d.x = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
  d.y = {1.0, 2.0, 4.0};
  d.weights = {1.0, 1.0, 2.0};
  ForestHyperparams hp;
  hp.max_depth = 0;
  hp.max_features = 2;
  auto tree = forest::train_tree(d, hp, {1, 1, 1}, 0);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].value == doctest::Approx(2.75).epsilon(1e-15));  // 11/4

  // Bootstrap multiplicity scales the contribution of each row.
  auto tree2 = forest::train_tree(d, hp, {2, 1, 0}, 0);
  CHECK(tree2.nodes[0].value == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(tree2.nodes[0].n_samples == 3);
}

TEST_CASE("forest: same seed reproduces the model, other seeds differ") {
  Dataset d = make_table(80, 6, 31);
  set_linear_target(d, 2, 1.5, 0.2, 32);
  ForestHyperparams hp;
  hp.n_trees = 40;
  const auto a = forest::train_forest(d, hp, 99);
  const auto b = forest::train_forest(d, hp, 99);
  CHECK(forest::serialize_model(a) == forest::serialize_model(b));
  const auto c = forest::train_forest(d, hp, 100);
  CHECK(forest::serialize_model(a) != forest::serialize_model(c));
}

TEST_CASE("forest: planted linear signal is recovered out of sample") {
  Dataset d = make_table(450, 12, 41);
  set_linear_target(d, 3, 2.0, 0.01, 42);
  auto [train, test] = split_rows(d, 300);
  ForestHyperparams hp;
  hp.n_trees = 200;
  const auto model = forest::train_forest(train, hp, 7);
  const double score = forest::r2(test.y, forest::predict_batch(model, test.x));
  CHECK(score >= 0.95);
}

TEST_CASE("forest: pure interaction beats linear regression decisively") {
  Dataset d = make_table(500, 4, 51);
  set_interaction_target(d, 1, 2);
  auto [train, test] = split_rows(d, 350);
  ForestHyperparams hp;
  hp.n_trees = 300;
  const auto model = forest::train_forest(train, hp, 13);
  const double rf = forest::r2(test.y, forest::predict_batch(model, test.x));
  const double lin = linear_regression_r2(train, test);
  CHECK(rf >= 0.6);
  CHECK(lin <= 0.05);
}

TEST_CASE("predict: single tree passthrough, mean bounds, duplication") {
  Dataset d = make_table(50, 4, 61);
  set_linear_target(d, 0, 1.0, 0.3, 62);
  ForestHyperparams hp;
  hp.n_trees = 1;
  auto single = forest::train_forest(d, hp, 5);
  const std::vector<double> probe = {0.2, -0.4, 0.9, 0.0};
  CHECK(forest::predict(single, probe) == single.trees[0].predict(probe));

  hp.n_trees = 25;
  auto model = forest::train_forest(d, hp, 5);
  double lo = 1e300, hi = -1e300;
  for (const auto& t : model.trees) {
    const double v = t.predict(probe);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pred = forest::predict(model, probe);
  CHECK(pred >= lo - 1e-12);
  CHECK(pred <= hi + 1e-12);

  auto doubled = model;
  doubled.trees.insert(doubled.trees.end(), model.trees.begin(), model.trees.end());
  CHECK(forest::predict(doubled, probe) == doctest::Approx(pred).epsilon(1e-12));

  CHECK_THROWS_AS(forest::predict(model, {1.0, 2.0}), InputError);
}

TEST_CASE("metrics: r2 and mae fixtures") {
  const std::vector<double> y = {1.0, 2.0, 3.0};
  CHECK(forest::r2(y, y) == 1.0);
  CHECK(forest::mae(y, y) == 0.0);

  const double mean = 2.0;
  CHECK(forest::r2(y, {mean, mean, mean}) == 0.0);

  CHECK(forest::mae(y, {1.0, 2.0, 4.0}) == 1.0 / 3.0);
  CHECK(forest::mae({0.0, 0.0}, {1.0, 3.0}, {1.0, 3.0}) == 2.5);

  CHECK_THROWS_AS(forest::r2({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), InputError);
  CHECK_THROWS_AS(forest::r2({1.0}, {1.0, 2.0}), InputError);
  CHECK_THROWS_AS(forest::mae({1.0}, {1.0}, {1.0, 2.0}), InputError);
}

TEST_CASE("oob: tracks held-out performance on a strong signal") {
  Dataset d = make_table(500, 8, 71);
  set_linear_target(d, 4, 2.0, 0.1, 72);
  auto [train, test] = split_rows(d, 350);
  ForestHyperparams hp;
  hp.n_trees = 250;
  const auto model = forest::train_forest(train, hp, 17);
  const double oob = forest::oob_score(model, train);
  const double held = forest::r2(test.y, forest::predict_batch(model, test.x));
  const double resub = forest::r2(train.y, forest::predict_batch(model, train.x));
  CHECK(std::abs(oob - held) <= 0.1);
  CHECK(resub >= oob);
  CHECK(oob >= held - 0.1);
}

TEST_CASE("oob: pure noise scores near zero") {
  Dataset d = make_table(300, 8, 81);
  Rng rng(82);
  for (double& v : d.y) v = rng.normal();
  ForestHyperparams hp;
  hp.n_trees = 150;
  const auto model = forest::train_forest(d, hp, 19);
  CHECK(forest::oob_score(model, d) <= 0.05);
}

TEST_CASE("oob: a single bootstrap leaves about a third of rows out") {
  Dataset d = make_table(500, 3, 91);
  set_linear_target(d, 0, 1.0, 0.5, 92);
  ForestHyperparams hp;
  hp.n_trees = 1;
  const auto model = forest::train_forest(d, hp, 23);
  int out = 0;
  for (int r = 0; r < d.n_rows(); ++r)
    if (model.bootstrap_counts[0][static_cast<size_t>(r)] == 0) ++out;
  const double frac = static_cast<double>(out) / d.n_rows();
  CHECK(frac == doctest::Approx(std::exp(-1.0)).epsilon(0.28));  // 0.368 +- ~0.10
  CHECK(frac > 0.27);
  CHECK(frac < 0.47);
}

TEST_CASE("oob: rejected when every tree saw every row") {
  Dataset d = make_table(1, 3, 101);
  d.y[0] = 1.0;
  ForestHyperparams hp;
  hp.n_trees = 10;
  const auto model = forest::train_forest(d, hp, 29);
  CHECK_THROWS_AS(forest::oob_score(model, d), InputError);
}

TEST_CASE("weights: all-equal weights reproduce unweighted training exactly") {
  Dataset d = make_table(90, 5, 111);
  set_linear_target(d, 1, 1.0, 0.4, 112);
  Dataset scaled = d;
  for (double& w : scaled.weights) w = 0.25;
  ForestHyperparams hp;
  hp.n_trees = 30;
  const auto a = forest::train_forest(d, hp, 3);
  const auto b = forest::train_forest(scaled, hp, 3);
  CHECK(forest::serialize_model(a) == forest::serialize_model(b));
}

TEST_CASE("weights: balanced data trains almost identically with or without "
          "imbalance-style weights") {
  Dataset d = make_table(400, 8, 121);
  set_linear_target(d, 3, 2.0, 0.05, 122);
  auto [train, test] = split_rows(d, 280);
  Dataset weighted = train;
  Rng rng(123);
  for (double& w : weighted.weights) w = 1.0 / static_cast<double>(1 + rng.bounded(8));
  ForestHyperparams hp;
  hp.n_trees = 200;
  const auto plain = forest::train_forest(train, hp, 31);
  const auto reweighted = forest::train_forest(weighted, hp, 31);
  const double r_plain = forest::r2(test.y, forest::predict_batch(plain, test.x));
  const double r_weighted =
      forest::r2(test.y, forest::predict_batch(reweighted, test.x));
  CHECK(std::abs(r_plain - r_weighted) < 0.02);
}

TEST_CASE("permutation: row order never changes the fitted model") {
  Dataset d = make_table(60, 5, 131);
  set_linear_target(d, 2, 1.2, 0.3, 132);
  Dataset shuffled;
  shuffled.feature_names = d.feature_names;
  shuffled.category = d.category;
  std::vector<int> perm(60);
  for (int i = 0; i < 60; ++i) perm[static_cast<size_t>(i)] = i;
  Rng rng(133);
  rng.shuffle(perm);
  for (int i : perm) {
    shuffled.shape_ids.push_back(d.shape_ids[static_cast<size_t>(i)]);
    shuffled.x.push_back(d.x[static_cast<size_t>(i)]);
    shuffled.y.push_back(d.y[static_cast<size_t>(i)]);
    shuffled.weights.push_back(d.weights[static_cast<size_t>(i)]);
  }
  ForestHyperparams hp;
  hp.n_trees = 25;
  const auto a = forest::train_forest(d, hp, 37);
  const auto b = forest::train_forest(shuffled, hp, 37);
  Rng probe_rng(134);
  for (int probe = 0; probe < 10; ++probe) {
    std::vector<double> xp(5);
    for (double& v : xp) v = 2.0 * probe_rng.uniform01() - 1.0;
    CHECK(forest::predict(a, xp) == forest::predict(b, xp));
  }
  // Bootstrap membership is keyed by shape id, not by row position.
  for (int t : {0, 7, 24}) {
    for (int i : {0, 13, 59}) {
      int j = 0;
      while (shuffled.shape_ids[static_cast<size_t>(j)] != d.shape_ids[static_cast<size_t>(i)]) ++j;
      CHECK(a.bootstrap_counts[static_cast<size_t>(t)][static_cast<size_t>(i)] ==
            b.bootstrap_counts[static_cast<size_t>(t)][static_cast<size_t>(j)]);
    }
  }

  // Fold assignments follow ids through the permutation as well.
  ForestHyperparams tiny;
  tiny.n_trees = 10;
  const auto cv_a = forest::grid_search_cv(d, {tiny}, 5, 42);
  const auto cv_b = forest::grid_search_cv(shuffled, {tiny}, 5, 42);
  for (int i : {0, 13, 59}) {
    int j = 0;
    while (shuffled.shape_ids[static_cast<size_t>(j)] != d.shape_ids[static_cast<size_t>(i)]) ++j;
    CHECK(cv_a.fold_assignment[static_cast<size_t>(i)] ==
          cv_b.fold_assignment[static_cast<size_t>(j)]);
  }
  CHECK(cv_a.best_score == cv_b.best_score);
}

TEST_CASE("cv: folds partition the data and repeat deterministically") {
  Dataset d = make_table(47, 4, 141);
  set_linear_target(d, 0, 1.0, 0.3, 142);
  ForestHyperparams hp;
  hp.n_trees = 20;
  const auto r1 = forest::grid_search_cv(d, {hp}, 5, 42);
  const auto r2 = forest::grid_search_cv(d, {hp}, 5, 42);
  CHECK(r1.fold_assignment == r2.fold_assignment);
  CHECK(r1.best_score == r2.best_score);
  REQUIRE(r1.scores.size() == 1);
  CHECK(r1.best == hp);

  std::vector<int> sizes(5, 0);
  for (int f : r1.fold_assignment) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++sizes[static_cast<size_t>(f)];
  }
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("cv: interaction data needs depth, and the grid finds that out") {
  Dataset d = make_table(200, 4, 151);
  set_interaction_target(d, 0, 1);
  ForestHyperparams shallow, deep;
  shallow.n_trees = deep.n_trees = 100;
  shallow.max_depth = 1;
  deep.max_depth = 8;
  shallow.max_features = deep.max_features = 4;
  const auto report = forest::grid_search_cv(d, {shallow, deep}, 5, 42);
  CHECK(report.best == deep);
  double shallow_score = 0.0, deep_score = 0.0;
  for (const auto& [hp, score] : report.scores) {
    if (hp == shallow) shallow_score = score;
    if (hp == deep) deep_score = score;
  }
  CHECK(deep_score > shallow_score + 0.3);
}

TEST_CASE("cv: constant targets make folds degenerate") {
  Dataset d = make_table(30, 3, 161);
  for (double& v : d.y) v = 1.0;
  ForestHyperparams hp;
  hp.n_trees = 5;
  CHECK_THROWS_AS(forest::grid_search_cv(d, {hp}, 5, 42), InputError);
}

TEST_CASE("transfer: self, shared-driver and disjoint-driver cases") {
  ForestHyperparams hp;
  hp.n_trees = 150;

  Dataset a = make_table(250, 6, 171);
  set_linear_target(a, 3, 2.0, 0.1, 172);
  const auto model = forest::train_forest(a, hp, 41);

  const auto self = forest::transfer_evaluate(model, a);
  CHECK(self.self_transfer);
  CHECK(std::abs(self.drop) <= 0.1);

  Dataset b = make_table(200, 6, 181);
  for (auto& id : b.shape_ids) id = "b_" + id;
  set_linear_target(b, 3, 2.0, 0.1, 182);
  const auto shared = forest::transfer_evaluate(model, b);
  CHECK_FALSE(shared.self_transfer);
  CHECK(shared.drop <= 0.1);
  CHECK(shared.transfer_r2 >= 0.8);

  Dataset c = make_table(200, 6, 191);
  for (auto& id : c.shape_ids) id = "c_" + id;
  set_linear_target(c, 5, 2.0, 0.1, 192);
  const auto disjoint = forest::transfer_evaluate(model, c);
  CHECK(disjoint.transfer_r2 <= 0.1);
}

TEST_CASE("serialization: byte round trip preserves behavior and metadata") {
  Dataset d = make_table(70, 5, 201);
  set_linear_target(d, 2, 1.5, 0.2, 202);
  ForestHyperparams hp;
  hp.n_trees = 20;
  hp.max_depth = 6;
  hp.min_samples_leaf = 2;
  const auto model = forest::train_forest(d, hp, 43);
  const std::string text = forest::serialize_model(model);
  const auto back = forest::deserialize_model(text);
  CHECK(back.params == model.params);
  CHECK(back.feature_names == model.feature_names);
  CHECK(back.training_ids == model.training_ids);
  CHECK(back.seed == model.seed);
  Rng rng(203);
  for (int probe = 0; probe < 10; ++probe) {
    std::vector<double> xp(5);
    for (double& v : xp) v = 2.0 * rng.uniform01() - 1.0;
    CHECK(forest::predict(back, xp) == forest::predict(model, xp));
  }
  CHECK(forest::serialize_model(back) == text);

  CHECK_THROWS_AS(forest::deserialize_model("not json at all"), InputError);
  CHECK_THROWS_AS(forest::deserialize_model("{\"format\":\"shaperank-forest-v1\"}"),
                  InputError);
}

TEST_CASE("parallel and serial training agree bit for bit") {
  Dataset d = make_table(120, 6, 211);
  set_linear_target(d, 1, 1.0, 0.3, 212);
  ForestHyperparams hp;
  hp.n_trees = 30;
  const auto par = forest::train_forest(d, hp, 47);
  const auto ser = forest::train_forest_serial(d, hp, 47);
  CHECK(forest::serialize_model(par) == forest::serialize_model(ser));
}

TEST_CASE("dataset validation rejects malformed input") {
  Dataset d = make_table(5, 3, 221);
  d.y.pop_back();
  CHECK_THROWS_AS(d.validate(), InputError);

  Dataset dup = make_table(5, 3, 222);
  dup.shape_ids[4] = dup.shape_ids[0];
  CHECK_THROWS_AS(dup.validate(), InputError);

  Dataset bad_w = make_table(5, 3, 223);
  bad_w.weights[2] = 0.0;
  CHECK_THROWS_AS(bad_w.validate(), InputError);

  Dataset ragged = make_table(5, 3, 224);
  ragged.x[3].pop_back();
  CHECK_THROWS_AS(ragged.validate(), InputError);

  Dataset nf = make_table(5, 3, 225);
  nf.y[1] = std::nan("");
  CHECK_THROWS_AS(nf.validate(), InputError);
}

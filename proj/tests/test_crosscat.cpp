#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shaperank/core/error.hpp"
#include "shaperank/core/rng.hpp"
#include "shaperank/crosscat/crosscat.hpp"

using namespace shaperank;
using crosscat::Dendrogram;
using crosscat::ImportanceMatrix;
using crosscat::ManovaConfig;
using crosscat::ManovaStatistic;

namespace {

// Brute-force average-linkage clustering: cluster distance recomputed from
// scratch as the mean pairwise leaf distance, never via the recursive update.
Dendrogram brute_force_upgma(const ImportanceMatrix& imp) {
  const int n = static_cast<int>(imp.categories.size());
  std::vector<std::vector<double>> d0(static_cast<size_t>(n),
                                      std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = 1.0 - crosscat::spearman(imp.values[static_cast<size_t>(i)],
                                                imp.values[static_cast<size_t>(j)]);
      d0[static_cast<size_t>(i)][static_cast<size_t>(j)] = d;
      d0[static_cast<size_t>(j)][static_cast<size_t>(i)] = d;
    }
  struct Cluster {
    int id;
    std::vector<int> leaves;
  };
  std::vector<Cluster> active;
  for (int i = 0; i < n; ++i) active.push_back({i, {i}});
  auto linkage = [&](const Cluster& a, const Cluster& b) {
    double sum = 0.0;
    for (int u : a.leaves)
      for (int v : b.leaves) sum += d0[static_cast<size_t>(u)][static_cast<size_t>(v)];
    return sum / (static_cast<double>(a.leaves.size()) * static_cast<double>(b.leaves.size()));
  };
  Dendrogram tree;
  tree.labels = imp.categories;
  int next_id = n;
  while (active.size() > 1) {
    size_t bi = 0, bj = 1;
    double best = 1e300;
    for (size_t i = 0; i < active.size(); ++i)
      for (size_t j = i + 1; j < active.size(); ++j) {
        const double d = linkage(active[i], active[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    Cluster merged;
    merged.id = next_id++;
    merged.leaves = active[bi].leaves;
    merged.leaves.insert(merged.leaves.end(), active[bj].leaves.begin(),
                         active[bj].leaves.end());
    tree.merges.push_back({std::min(active[bi].id, active[bj].id),
                           std::max(active[bi].id, active[bj].id), best,
                           static_cast<int>(merged.leaves.size())});
    active[bi] = merged;
    active.erase(active.begin() + static_cast<long>(bj));
  }
  return tree;
}

ImportanceMatrix random_importances(int categories, int features, uint64_t seed) {
  ImportanceMatrix imp;
  Rng rng(seed);
  for (int c = 0; c < categories; ++c) {
    imp.categories.push_back("cat" + std::to_string(c));
    std::vector<double> row(static_cast<size_t>(features));
    for (double& v : row) v = rng.uniform01();
    imp.values.push_back(row);
  }
  for (int f = 0; f < features; ++f) imp.features.push_back("f" + std::to_string(f));
  return imp;
}

}  // namespace

TEST_CASE("spearman: fixtures, ties, and monotone invariance") {
  CHECK(crosscat::spearman({1, 2, 3, 4}, {1, 2, 3, 4}) == 1.0);
  CHECK(crosscat::spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == -1.0);
  CHECK(crosscat::spearman({1, 2, 3, 4}, {1, 3, 2, 4}) == 0.8);

  CHECK(crosscat::spearman({1, 1, 2, 3}, {10, 10, 20, 30}) ==
        doctest::Approx(1.0).epsilon(1e-15));

  // Any strictly monotone transform of either input changes nothing.
  const std::vector<double> x = {0.3, -1.2, 5.0, 2.2, 0.9};
  const std::vector<double> y = {2.0, 7.5, -0.5, 1.0, 4.4};
  std::vector<double> y2 = y;
  for (double& v : y2) v = 2.0 * v + 1.0;
  CHECK(crosscat::spearman(x, y) == crosscat::spearman(x, y2));
  std::vector<double> x2 = x;
  for (double& v : x2) v = v * v * v;  // odd cube keeps order
  CHECK(crosscat::spearman(x, y) == crosscat::spearman(x2, y));

  CHECK_THROWS_AS(crosscat::spearman({1, 2}, {3, 4}), InputError);
  CHECK_THROWS_AS(crosscat::spearman({1, 2, 3}, {3, 4}), InputError);
  CHECK_THROWS_AS(crosscat::spearman({5, 5, 5}, {1, 2, 3}), InputError);
}

TEST_CASE("correlation matrix: symmetry, unit diagonal, scale invariance") {
  ImportanceMatrix imp = random_importances(4, 7, 401);
  imp.values[1] = imp.values[0];  // duplicate category profile
  const auto m = crosscat::importance_correlation_matrix(imp);
  REQUIRE(m.size() == 4);
  CHECK(m[0][1] == 1.0);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(m[i][i] == 1.0);
    for (size_t j = 0; j < 4; ++j) {
      CHECK(m[i][j] == m[j][i]);
      CHECK(m[i][j] >= -1.0);
      CHECK(m[i][j] <= 1.0);
    }
  }

  ImportanceMatrix scaled = imp;
  for (double& v : scaled.values[2]) v *= 5.0;
  CHECK(crosscat::importance_correlation_matrix(scaled) == m);

  ImportanceMatrix tiny;
  tiny.categories = {"only"};
  tiny.features = {"f"};
  tiny.values = {{1.0}};
  CHECK_THROWS_AS(crosscat::importance_correlation_matrix(tiny), InputError);
}

TEST_CASE("clustering: identical profiles merge first at distance zero") {
  ImportanceMatrix imp;
  imp.categories = {"a", "b", "c"};
  imp.features = {"f0", "f1", "f2", "f3"};
  imp.values = {{0.9, 0.1, 0.5, 0.2},
                {0.9, 0.1, 0.5, 0.2},
                {0.1, 0.8, 0.2, 0.9}};
  const auto tree = crosscat::hierarchical_cluster(imp);
  REQUIRE(tree.merges.size() == 2);
  CHECK(tree.merges[0].a == 0);
  CHECK(tree.merges[0].b == 1);
  CHECK(tree.merges[0].distance == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(tree.merges[0].size == 2);
  CHECK(tree.merges[1].size == 3);
  CHECK(tree.merges[1].distance >= tree.merges[0].distance);
}

TEST_CASE("clustering: agrees with brute-force enumeration on six leaves") {
  for (uint64_t seed : {411u, 412u, 413u}) {
    const ImportanceMatrix imp = random_importances(6, 8, seed);
    const auto fast = crosscat::hierarchical_cluster(imp);
    const auto slow = brute_force_upgma(imp);
    REQUIRE(fast.merges.size() == slow.merges.size());
    for (size_t i = 0; i < fast.merges.size(); ++i) {
      CHECK(fast.merges[i].a == slow.merges[i].a);
      CHECK(fast.merges[i].b == slow.merges[i].b);
      CHECK(fast.merges[i].size == slow.merges[i].size);
      CHECK(fast.merges[i].distance ==
            doctest::Approx(slow.merges[i].distance).epsilon(1e-12));
    }
    for (size_t i = 0; i + 1 < fast.merges.size(); ++i)
      CHECK(fast.merges[i].distance <= fast.merges[i + 1].distance + 1e-12);
  }
}

TEST_CASE("clustering: leaf permutation preserves the merge distances") {
  const ImportanceMatrix imp = random_importances(5, 6, 421);
  ImportanceMatrix permuted;
  permuted.features = imp.features;
  const std::vector<int> order = {3, 0, 4, 2, 1};
  for (int i : order) {
    permuted.categories.push_back(imp.categories[static_cast<size_t>(i)]);
    permuted.values.push_back(imp.values[static_cast<size_t>(i)]);
  }
  const auto a = crosscat::hierarchical_cluster(imp);
  const auto b = crosscat::hierarchical_cluster(permuted);
  std::vector<double> da, db;
  for (const auto& m : a.merges) da.push_back(m.distance);
  for (const auto& m : b.merges) db.push_back(m.distance);
  std::sort(da.begin(), da.end());
  std::sort(db.begin(), db.end());
  REQUIRE(da.size() == db.size());
  for (size_t i = 0; i < da.size(); ++i)
    CHECK(da[i] == doctest::Approx(db[i]).epsilon(1e-12));
}

TEST_CASE("incomplete beta: closed forms and F distribution medians") {
  for (double x : {0.1, 0.35, 0.5, 0.8, 0.99}) {
    CHECK(crosscat::regularized_incomplete_beta(1.0, 1.0, x) ==
          doctest::Approx(x).epsilon(1e-13));
    CHECK(crosscat::regularized_incomplete_beta(2.0, 1.0, x) ==
          doctest::Approx(x * x).epsilon(1e-13));
    CHECK(crosscat::regularized_incomplete_beta(1.0, 2.0, x) ==
          doctest::Approx(1.0 - (1.0 - x) * (1.0 - x)).epsilon(1e-13));
  }
  // F(d, d) has median exactly 1.
  for (double d : {1.0, 2.0, 5.0, 9.0, 24.0})
    CHECK(crosscat::f_cdf(1.0, d, d) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(crosscat::f_cdf(0.0, 3.0, 7.0) == 0.0);
}

TEST_CASE("manova: hand-computed three-group fixture") {
  // Groups {1,2,3,4}, {2,3,4,5}, {4,5,6,7}: SSB = 56/3, SSW = 15, F = 5.6.
  std::vector<std::vector<double>> samples;
  std::vector<std::string> groups;
  for (double v : {1.0, 2.0, 3.0, 4.0}) { samples.push_back({v}); groups.push_back("g1"); }
  for (double v : {2.0, 3.0, 4.0, 5.0}) { samples.push_back({v}); groups.push_back("g2"); }
  for (double v : {4.0, 5.0, 6.0, 7.0}) { samples.push_back({v}); groups.push_back("g3"); }

  const auto res = crosscat::manova(samples, groups);
  REQUIRE(res.per_feature.size() == 1);
  CHECK(res.per_feature[0].f == doctest::Approx(5.6).epsilon(1e-12));
  // Survival of F(2, 9) at 5.6 in closed form: (1 + 2F/9)^(-9/2).
  const double p_ref = std::pow(1.0 + 2.0 * 5.6 / 9.0, -4.5);
  CHECK(res.per_feature[0].p == doctest::Approx(p_ref).epsilon(1e-9));

  // With one feature the multivariate test collapses onto the ANOVA.
  CHECK(res.statistic == doctest::Approx(45.0 / 101.0).epsilon(1e-12));
  CHECK(res.f == doctest::Approx(5.6).epsilon(1e-12));
  CHECK(res.df1 == 2.0);
  CHECK(res.df2 == 9.0);
  CHECK(res.p_value == doctest::Approx(p_ref).epsilon(1e-9));
  CHECK_FALSE(res.used_pseudo_inverse);

  ManovaConfig pillai;
  pillai.statistic = ManovaStatistic::kPillai;
  const auto res_p = crosscat::manova(samples, groups, pillai);
  CHECK(res_p.statistic == doctest::Approx(56.0 / 101.0).epsilon(1e-12));
  CHECK(res_p.f == doctest::Approx(5.6).epsilon(1e-12));
  CHECK(res_p.p_value == doctest::Approx(p_ref).epsilon(1e-9));
}

TEST_CASE("manova: duplicated groups show no effect at all") {
  Rng rng(431);
  std::vector<std::vector<double>> samples;
  std::vector<std::string> groups;
  std::vector<std::vector<double>> block;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> row = {rng.normal(), rng.normal(), rng.normal()};
    block.push_back(row);
  }
  for (const auto& row : block) { samples.push_back(row); groups.push_back("first"); }
  for (const auto& row : block) { samples.push_back(row); groups.push_back("second"); }

  const auto res = crosscat::manova(samples, groups);
  CHECK(res.statistic == 1.0);
  CHECK(res.p_value == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& ft : res.per_feature) {
    CHECK(ft.f == 0.0);
    CHECK(ft.p == 1.0);
  }
}

TEST_CASE("manova: a five-sigma shift is unmistakable") {
  Rng rng(441);
  std::vector<std::vector<double>> samples;
  std::vector<std::string> groups;
  const std::vector<std::string> labels = {"a", "b", "c"};
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 30; ++i) {
      std::vector<double> row(4);
      for (double& v : row) v = rng.normal();
      if (g == 1) row[1] += 5.0;
      samples.push_back(row);
      groups.push_back(labels[static_cast<size_t>(g)]);
    }
  const auto res = crosscat::manova(samples, groups);
  CHECK(res.p_value < 0.001);
  CHECK(res.per_feature[1].p < 0.001);
  for (const auto& ft : res.per_feature) {
    CHECK(ft.p >= 0.0);
    CHECK(ft.p <= 1.0);
  }
  CHECK(res.statistic > 0.0);
  CHECK(res.statistic <= 1.0);
}

TEST_CASE("manova: collinear columns trigger the pseudo-inverse fallback") {
  Rng rng(451);
  std::vector<std::vector<double>> samples;
  std::vector<std::string> groups;
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 10; ++i) {
      std::vector<double> row(4);
      for (int j = 0; j < 3; ++j) row[static_cast<size_t>(j)] = rng.normal() + g;
      row[3] = 0.0;  // dead column: zero within-group variance
      samples.push_back(row);
      groups.push_back("g" + std::to_string(g));
    }
  const auto res = crosscat::manova(samples, groups);
  CHECK(res.used_pseudo_inverse);
  CHECK(std::isfinite(res.f));
  CHECK(res.statistic > 0.0);
  CHECK(res.statistic <= 1.0);
  CHECK(res.per_feature[3].f == 0.0);
  CHECK(res.per_feature[3].p == 1.0);
}

TEST_CASE("manova: input validation") {
  std::vector<std::vector<double>> samples = {{1.0, 2.0}, {2.0, 1.0}, {0.5, 0.5}};
  CHECK_THROWS_AS(crosscat::manova(samples, {"a", "a", "a"}), InputError);
  CHECK_THROWS_AS(crosscat::manova(samples, {"a", "b"}), InputError);
  // Two features but only two samples per group.
  std::vector<std::vector<double>> small = {{1.0, 2.0}, {2.0, 1.0}, {0.5, 0.5}, {0.1, 0.9}};
  CHECK_THROWS_AS(crosscat::manova(small, {"a", "a", "b", "b"}), InputError);
}

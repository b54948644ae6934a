#include "shaperank/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "shaperank/core/error.hpp"
#include "shaperank/core/rng.hpp"
#include "shaperank/crosscat/crosscat.hpp"
#include "shaperank/explain/explain.hpp"

namespace shaperank::synth {

namespace {

void check_rectangular(const std::vector<std::vector<double>>& x) {
  if (x.empty()) throw InputError("feature matrix is empty");
  const size_t p = x.front().size();
  if (p == 0) throw InputError("feature matrix has zero columns");
  for (const auto& row : x) {
    if (row.size() != p) throw InputError("feature matrix rows have mixed widths");
    for (double v : row)
      if (!std::isfinite(v)) throw InputError("feature matrix has a non-finite entry");
  }
}

// Indices that walk the ids in sorted order; duplicates are rejected because
// every pipeline stage keys on the id.
std::vector<int> sorted_id_order(const std::vector<std::string>& ids) {
  std::vector<int> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ids[static_cast<size_t>(a)] < ids[static_cast<size_t>(b)];
  });
  for (size_t i = 1; i < order.size(); ++i)
    if (ids[static_cast<size_t>(order[i - 1])] == ids[static_cast<size_t>(order[i])])
      throw InputError("duplicate shape id '" + ids[static_cast<size_t>(order[i])] + "'");
  return order;
}

std::string shape_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%04d", i);
  return buf;
}

// Seeded knob values per family. Every knob stays inside its documented
// range, and the ranges are balanced so that no descriptor becomes a proxy
// for the family itself: surface-to-volume spans an overlapping band in all
// five families (prong length, not prong count, sets it there), and each
// knob moves its target feature independently of the family's other knobs.
ShapeSpec random_spec(Generator kind, Rng& rng) {
  ShapeSpec spec;
  spec.kind = kind;
  switch (kind) {
    case Generator::kBox:
      spec.size_x = 0.3 + 1.5 * rng.uniform01();
      spec.size_y = 0.3 + 1.5 * rng.uniform01();
      spec.size_z = 0.3 + 1.5 * rng.uniform01();
      break;
    case Generator::kCylinder:
      spec.radius = 0.08 + 0.42 * rng.uniform01();
      spec.height = 0.5 + 1.5 * rng.uniform01();
      spec.segments = 12 + static_cast<int>(rng.bounded(37));
      break;
    case Generator::kLathe: {
      // The knob drawn here is the PEAK radius; dividing out (1 + wiggle)
      // keeps the lateral extent — and with it AR Y = width/height —
      // independent of the wiggle knob that drives convexity and curvature.
      // Heights stay above the diameter so the slicing axis never flips.
      spec.wiggle = 0.05 + 0.6 * rng.uniform01();
      spec.radius = (0.10 + 0.28 * rng.uniform01()) / (1.0 + spec.wiggle);
      spec.height = 0.8 + 1.0 * rng.uniform01();
      spec.wiggle_lobes = 1 + static_cast<int>(rng.bounded(6));
      spec.segments = 32;
      spec.rings = 64;
      break;
    }
    case Generator::kProngUnion:
      spec.prongs = 1 + static_cast<int>(rng.bounded(6));
      spec.prong_length = 2.0 + 6.0 * rng.uniform01();
      break;
    case Generator::kCavityBox:
      spec.cavity_fraction = 0.15 + 0.7 * rng.uniform01();
      break;
  }
  return spec;
}

const std::vector<Generator>& all_families() {
  static const std::vector<Generator> kAll = {
      Generator::kBox, Generator::kCylinder, Generator::kLathe,
      Generator::kProngUnion, Generator::kCavityBox};
  return kAll;
}

}  // namespace

void validate_utility(const UtilitySpec& spec, int n_features) {
  if (n_features <= 0) throw InputError("utility: feature count must be positive");
  if (!spec.linear.empty() &&
      spec.linear.size() != static_cast<size_t>(n_features))
    throw InputError("utility: linear weights do not match the feature count");
  bool any = false;
  for (double w : spec.linear) {
    if (!std::isfinite(w)) throw InputError("utility: non-finite linear weight");
    any = any || w != 0.0;
  }
  for (const auto& t : spec.interactions) {
    if (t.a < 0 || t.a >= n_features || t.b < 0 || t.b >= n_features)
      throw InputError("utility: interaction index out of range");
    if (!std::isfinite(t.weight)) throw InputError("utility: non-finite interaction weight");
    any = any || t.weight != 0.0;
  }
  if (!std::isfinite(spec.noise_scale) || spec.noise_scale < 0.0)
    throw InputError("utility: noise scale must be finite and >= 0");
  any = any || spec.noise_scale > 0.0;
  if (!any) throw InputError("utility: needs at least one nonzero term");
}

std::vector<std::vector<double>> zscore_columns(
    const std::vector<std::vector<double>>& x) {
  check_rectangular(x);
  const size_t n = x.size();
  const size_t p = x.front().size();
  std::vector<std::vector<double>> z(n, std::vector<double>(p, 0.0));
  for (size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) sum += x[i][j];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = x[i][j] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    // A column whose spread is rounding dust relative to its magnitude is
    // constant for our purposes; dividing by its sd would amplify noise.
    const double tol = 1e-12 * std::max(1.0, std::abs(mean));
    if (!(sd > tol)) continue;
    for (size_t i = 0; i < n; ++i) z[i][j] = (x[i][j] - mean) / sd;
  }
  return z;
}

std::vector<double> planted_utilities(
    const std::vector<std::vector<double>>& features, const UtilitySpec& spec,
    std::uint64_t seed) {
  check_rectangular(features);
  const int p = static_cast<int>(features.front().size());
  validate_utility(spec, p);
  const auto z = zscore_columns(features);
  const size_t n = features.size();
  std::vector<double> u(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (size_t j = 0; j < spec.linear.size(); ++j) v += spec.linear[j] * z[i][j];
    for (const auto& t : spec.interactions)
      v += t.weight * z[i][static_cast<size_t>(t.a)] * z[i][static_cast<size_t>(t.b)];
    u[i] = v;
  }
  if (spec.noise_scale > 0.0) {
    Rng rng(seed);
    for (size_t i = 0; i < n; ++i) u[i] += spec.noise_scale * rng.normal();
  }
  return u;
}

std::vector<bt::ComparisonRecord> simulate_comparisons(
    const std::vector<std::string>& ids, const std::vector<double>& utilities,
    int n, std::uint64_t seed, const std::string& category) {
  if (ids.size() != utilities.size())
    throw InputError("simulate_comparisons: ids and utilities differ in length");
  if (ids.size() < 2)
    throw InputError("simulate_comparisons: need at least two shapes");
  if (n < 0) throw InputError("simulate_comparisons: negative comparison count");
  for (double u : utilities)
    if (!std::isfinite(u))
      throw InputError("simulate_comparisons: non-finite utility");

  const std::vector<int> order = sorted_id_order(ids);
  const uint64_t m = order.size();
  Rng rng(seed);
  std::vector<bt::ComparisonRecord> records;
  records.reserve(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    const uint64_t a = rng.bounded(m);
    uint64_t b = rng.bounded(m - 1);
    if (b >= a) ++b;  // uniform over ordered pairs with a != b
    const int i = order[static_cast<size_t>(a)];
    const int j = order[static_cast<size_t>(b)];
    const double p_i = bt::bt_probability(utilities[static_cast<size_t>(i)],
                                          utilities[static_cast<size_t>(j)]);
    const bool i_wins = rng.uniform01() < p_i;
    records.push_back({ids[static_cast<size_t>(i_wins ? i : j)],
                       ids[static_cast<size_t>(i_wins ? j : i)], category});
  }
  return records;
}

std::vector<bt::ComparisonRecord> simulate_comparisons(
    const std::vector<std::string>& ids,
    const std::vector<std::vector<double>>& features, const UtilitySpec& spec,
    int n, std::uint64_t seed, const std::string& category) {
  if (ids.size() != features.size())
    throw InputError("simulate_comparisons: ids and feature rows differ in length");
  // Stream 0 feeds the per-shape noise, stream 1 the pair sampling, so the
  // two sources cannot alias.
  const auto u = planted_utilities(features, spec, derive_stream(seed, 0));
  return simulate_comparisons(ids, u, n, derive_stream(seed, 1), category);
}

std::vector<ShapeSpec> draw_corpus_specs(int n_shapes, std::uint64_t seed,
                                         const std::vector<Generator>& families) {
  if (n_shapes < 2) throw InputError("draw_corpus_specs: need at least two shapes");
  const std::vector<Generator>& cycle = families.empty() ? all_families() : families;
  std::vector<ShapeSpec> specs;
  specs.reserve(static_cast<size_t>(n_shapes));
  for (int i = 0; i < n_shapes; ++i) {
    Rng rng(derive_stream(seed, static_cast<uint64_t>(i)));
    specs.push_back(random_spec(cycle[static_cast<size_t>(i) % cycle.size()], rng));
  }
  return specs;
}

Corpus make_corpus(int n_shapes, std::uint64_t seed,
                   const feat::FeatureConfig& config,
                   const std::vector<Generator>& families) {
  if (n_shapes < 2) throw InputError("make_corpus: need at least two shapes");
  Corpus corpus;
  corpus.specs = draw_corpus_specs(n_shapes, seed, families);
  corpus.ids.reserve(static_cast<size_t>(n_shapes));
  for (int i = 0; i < n_shapes; ++i) corpus.ids.push_back(shape_id(i));
  corpus.features.assign(static_cast<size_t>(n_shapes), {});

  std::exception_ptr failure = nullptr;
  const long long n = n_shapes;
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      const geom::Mesh mesh = generate_shape(corpus.specs[static_cast<size_t>(i)]);
      feat::FeatureConfig fc = config;
      fc.seed = derive_stream(seed, 1000000 + static_cast<uint64_t>(i));
      const feat::FeatureVector fv = feat::extract_all(mesh, fc);
      const auto vals = fv.values();
      corpus.features[static_cast<size_t>(i)].assign(vals.begin(), vals.end());
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return corpus;
}

ExperimentReport planted_driver_experiment(const ExperimentConfig& config,
                                           std::uint64_t seed) {
  ExperimentReport report;
  report.seed = seed;

  if (!config.ids.empty() || !config.feature_rows.empty()) {
    if (config.ids.size() != config.feature_rows.size())
      throw InputError("experiment: ids and feature rows differ in length");
    check_rectangular(config.feature_rows);
    report.corpus.ids = config.ids;
    report.corpus.features = config.feature_rows;
  } else {
    report.corpus = make_corpus(config.n_shapes, derive_stream(seed, 1),
                                config.features, config.families);
  }
  report.corpus.category = config.category;

  const auto& ids = report.corpus.ids;
  const auto& x = report.corpus.features;
  const int p = static_cast<int>(x.front().size());
  std::vector<std::string> names;
  if (p == feat::kFeatureCount) {
    const auto& canonical = feat::FeatureVector::names();
    names.assign(canonical.begin(), canonical.end());
  } else {
    for (int j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
  }

  report.utilities = planted_utilities(x, config.utility, derive_stream(seed, 2));
  report.comparisons = simulate_comparisons(ids, report.utilities,
                                            config.n_comparisons,
                                            derive_stream(seed, 3), config.category);

  bt::ShapeRegistry registry;
  for (const auto& id : ids) registry.add(id);
  report.fit = bt::fit_bt(report.comparisons, registry, config.bt);
  report.spearman_fit_truth = crosscat::spearman(report.fit.beta, report.utilities);

  const forest::WeightReport weights = forest::comparison_weights(report.comparisons, ids);
  forest::Dataset& d = report.dataset;
  d.shape_ids = ids;
  d.feature_names = names;
  d.x = x;
  d.y = report.fit.beta;
  d.weights.reserve(ids.size());
  for (const auto& id : ids) d.weights.push_back(weights.weights.at(id));
  d.category = config.category;
  d.validate();

  report.model = forest::train_forest(d, config.forest, derive_stream(seed, 4));
  report.oob_r2 = forest::oob_score(report.model, d);

  report.shap_importance = explain::global_importance(report.model, d.x);
  std::vector<std::pair<std::string, double>> ranked(report.shap_importance.begin(),
                                                     report.shap_importance.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [name, value] : ranked) report.shap_ranking.push_back(name);
  report.top_feature = report.shap_ranking.front();
  report.pearson = explain::pearson_feature_scan(d);
  return report;
}

}  // namespace shaperank::synth

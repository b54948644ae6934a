#include "pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shaperank/btrank/btrank.hpp"
#include "shaperank/core/error.hpp"
#include "shaperank/core/rng.hpp"
#include "shaperank/crosscat/crosscat.hpp"
#include "shaperank/explain/explain.hpp"
#include "shaperank/features/features.hpp"
#include "shaperank/forest/forest.hpp"
#include "shaperank/geometry/mesh_io.hpp"
#include "shaperank/synth/generators.hpp"
#include "shaperank/synth/synth.hpp"
#include "svg.hpp"

namespace shaperank::cli {

namespace {

namespace fs = std::filesystem;

// Fixed per-stage RNG streams derived from the one config seed, so each stage
// is deterministic on its own and the stages stay independent of one another.
constexpr uint64_t kStreamExtract = 1;
constexpr uint64_t kStreamCorpus = 2;
constexpr uint64_t kStreamUtility = 3;
constexpr uint64_t kStreamComparisons = 4;
constexpr uint64_t kStreamSplit = 5;
constexpr uint64_t kStreamCv = 6;
constexpr uint64_t kStreamForest = 7;

uint64_t seed_of(const io::Config& config) { return config.get_uint64("seed", 42); }

std::string category_of(const io::Config& config) {
  return config.get("category", "synthetic");
}

// Provenance hash over the analysis settings only. The paths.* keys say where
// files live and never change a computed value, so pointing the same analysis
// at a different directory keeps the stamp stable.
std::string analysis_hash(const io::Config& config) {
  io::Config pruned;
  for (const auto& [key, value] : config.entries())
    if (key.rfind("paths.", 0) != 0) pruned.set(key, value);
  return pruned.hash();
}

std::map<std::string, std::string> provenance(const io::Config& config,
                                              const std::string& schema) {
  return {{"schema", schema},
          {"config", analysis_hash(config)},
          {"seed", std::to_string(seed_of(config))},
          {"category", category_of(config)}};
}

std::string provenance_comment(const io::Config& config) {
  return "config=" + analysis_hash(config) + " seed=" + std::to_string(seed_of(config));
}

feat::FeatureConfig feature_config(const io::Config& config) {
  feat::FeatureConfig fc;
  fc.cloud_points = config.get_int("features.cloud_points", 2048);
  fc.curvature_k = config.get_int("features.curvature_k", 20);
  fc.voxel_resolution = config.get_int("features.resolution", 64);
  fc.n_planes = config.get_int("features.n_planes", 8);
  fc.n_views = config.get_int("features.n_views", 8);
  const std::string thinning = config.get("features.thinning", "slicewise");
  if (thinning == "slicewise") {
    fc.thinning = feat::ThinningMode::kSlicewise;
  } else if (thinning == "volumetric") {
    fc.thinning = feat::ThinningMode::kVolumetric;
  } else {
    throw InputError(
        "config key 'features.thinning': expected 'slicewise' or 'volumetric', got '" +
        thinning + "'");
  }
  return fc;
}

bt::BTConfig bt_config(const io::Config& config) {
  bt::BTConfig bc;
  bc.lambda = config.get_double("bt.lambda", 0.01);
  bc.tolerance = config.get_double("bt.tolerance", 1e-8);
  bc.max_iterations = config.get_int("bt.max_iterations", 100);
  return bc;
}

std::vector<forest::ForestHyperparams> grid_config(const io::Config& config) {
  std::vector<forest::ForestHyperparams> grid;
  for (int n_trees : config.get_int_list("forest.grid.n_trees", {100, 300, 500}))
    for (int depth : config.get_int_list("forest.grid.max_depth", {4, 8, 16, -1}))
      for (int leaf : config.get_int_list("forest.grid.min_samples_leaf", {1, 3, 5}))
        grid.push_back({n_trees, depth, leaf, -1});
  return grid;
}

// ---- stage file helpers ----------------------------------------------------

io::Table read_stage_table(const fs::path& path, const std::string& schema) {
  const io::Table table = io::read_table(path);
  const auto it = table.provenance.find("schema");
  if (it == table.provenance.end() || it->second != schema)
    throw InputError(path.string() + ": expected schema '" + schema + "', found '" +
                     (it == table.provenance.end() ? std::string("none") : it->second) +
                     "'");
  return table;
}

int column_index(const io::Table& table, const fs::path& path,
                 const std::string& name) {
  for (size_t j = 0; j < table.columns.size(); ++j)
    if (table.columns[j] == name) return static_cast<int>(j);
  throw InputError(path.string() + ": missing column '" + name + "'");
}

double cell_double(const io::Table& table, const fs::path& path, size_t row,
                   int col) {
  try {
    return io::parse_double(table.rows[row][static_cast<size_t>(col)]);
  } catch (const InputError& e) {
    throw InputError(path.string() + " row " + std::to_string(row + 1) +
                     ", column '" + table.columns[static_cast<size_t>(col)] +
                     "': " + e.what());
  }
}

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;  // rows[i] belongs to ids[i]
  std::vector<std::string> names;
  std::string category;  // from file provenance
};

FeatureTable read_features(const fs::path& path) {
  const io::Table table = read_stage_table(path, "features v1");
  if (table.columns.empty() || table.columns[0] != "shape_id")
    throw InputError(path.string() + ": first column must be 'shape_id'");
  if (table.columns.size() < 2)
    throw InputError(path.string() + ": no feature columns");
  FeatureTable data;
  data.names.assign(table.columns.begin() + 1, table.columns.end());
  const auto it = table.provenance.find("category");
  data.category = it == table.provenance.end() ? "" : it->second;
  std::set<std::string> seen;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (!seen.insert(row[0]).second)
      throw InputError(path.string() + ": duplicate shape id '" + row[0] + "'");
    data.ids.push_back(row[0]);
    std::vector<double> values;
    values.reserve(row.size() - 1);
    for (size_t j = 1; j < row.size(); ++j)
      values.push_back(cell_double(table, path, i, static_cast<int>(j)));
    data.rows.push_back(std::move(values));
  }
  if (data.ids.empty()) throw InputError(path.string() + ": no shapes");
  return data;
}

void check_category(const io::Config& config, const fs::path& path,
                    const std::string& file_category) {
  if (!file_category.empty() && file_category != category_of(config))
    throw InputError(path.string() + ": category '" + file_category +
                     "' does not match config category '" + category_of(config) +
                     "' (pass --category or adjust the config)");
}

std::vector<std::string> split_plain(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Comparisons may come from this pipeline (provenance-stamped table) or from
// outside as plain CSV. Either way the file needs winner and loser columns;
// a category column is optional and any extra columns (worker ids, session
// tags) are ignored.
std::vector<bt::ComparisonRecord> read_comparisons(const fs::path& path,
                                                   const std::string& fallback) {
  const std::string text = io::read_text(path);
  io::Table table;
  if (text.rfind(io::kCsvMagic, 0) == 0) {
    table = io::parse_table(text);
  } else {
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
      if (trimmed(line).empty()) continue;
      auto cells = split_plain(line);
      for (auto& c : cells) c = trimmed(c);
      if (!have_header) {
        table.columns = std::move(cells);
        have_header = true;
      } else {
        if (cells.size() != table.columns.size())
          throw InputError(path.string() + ": row with " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(table.columns.size()));
        table.rows.push_back(std::move(cells));
      }
    }
    if (!have_header) throw InputError(path.string() + ": empty comparisons file");
  }

  const int winner = column_index(table, path, "winner");
  const int loser = column_index(table, path, "loser");
  int category = -1;
  for (size_t j = 0; j < table.columns.size(); ++j)
    if (table.columns[j] == "category") category = static_cast<int>(j);

  std::vector<bt::ComparisonRecord> records;
  records.reserve(table.rows.size());
  for (size_t i = 0; i < table.rows.size(); ++i) {
    bt::ComparisonRecord r;
    r.winner = table.rows[i][static_cast<size_t>(winner)];
    r.loser = table.rows[i][static_cast<size_t>(loser)];
    r.category = category < 0 ? "" : table.rows[i][static_cast<size_t>(category)];
    if (r.category.empty()) r.category = fallback;
    if (r.winner.empty() || r.loser.empty())
      throw InputError(path.string() + " row " + std::to_string(i + 1) +
                       ": empty shape id");
    if (r.winner == r.loser)
      throw InputError(path.string() + " row " + std::to_string(i + 1) +
                       ": winner and loser are both '" + r.winner + "'");
    records.push_back(std::move(r));
  }
  if (records.empty()) throw InputError(path.string() + ": no comparison records");
  return records;
}

forest::ForestModel read_model(const fs::path& path) {
  return forest::deserialize_model(io::read_text(path));
}

// Rows the model was fitted on, in training order, pulled out of a feature
// table by shape id.
std::vector<std::vector<double>> training_rows(const forest::ForestModel& model,
                                               const FeatureTable& features,
                                               const fs::path& features_path) {
  if (model.feature_names != features.names)
    throw InputError(features_path.string() +
                     ": feature columns do not match the model's feature names");
  std::map<std::string, size_t> by_id;
  for (size_t i = 0; i < features.ids.size(); ++i) by_id[features.ids[i]] = i;
  std::vector<std::vector<double>> rows;
  rows.reserve(model.training_ids.size());
  for (const auto& id : model.training_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw InputError("model was trained on shape '" + id + "' which is missing from " +
                       features_path.string());
    rows.push_back(features.rows[it->second]);
  }
  return rows;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  io::write_text_atomic(path, doc.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void note(const fs::path& path, const std::string& detail) {
  std::cout << "wrote " << path.string() << " (" << detail << ")\n";
}

}  // namespace

// ---- config ----------------------------------------------------------------

io::Config default_config() {
  io::Config c;
  c.set("category", "synthetic");
  c.set("paths.mesh_dir", "meshes");
  c.set("paths.comparisons", "comparisons.csv");
  c.set("paths.out", "out");
  c.set("features.cloud_points", "2048");
  c.set("features.curvature_k", "20");
  c.set("features.resolution", "64");
  c.set("features.n_planes", "8");
  c.set("features.n_views", "8");
  c.set("features.thinning", "slicewise");
  c.set("bt.lambda", "0.01");
  c.set("bt.tolerance", "1e-8");
  c.set("bt.max_iterations", "100");
  c.set("forest.grid.n_trees", "100,300,500");
  c.set("forest.grid.max_depth", "4,8,16,-1");
  c.set("forest.grid.min_samples_leaf", "1,3,5");
  c.set("forest.cv_folds", "5");
  c.set("forest.test_fraction", "0.2");
  c.set("explain.pdp_features", "3");
  c.set("explain.pdp_grid", "20");
  c.set("synth.families", "");
  c.set("synth.n_shapes", "40");
  c.set("synth.n_comparisons", "1500");
  c.set("synth.driver", "S/V Ratio");
  c.set("synth.driver_weight", "1.5");
  c.set("synth.noise_scale", "0.15");
  c.set("seed", "42");
  return c;
}

io::Config load_config(const fs::path& path) {
  const io::Config defaults = default_config();
  const io::Config file = io::Config::load(path);
  io::Config merged = defaults;
  for (const auto& [key, value] : file.entries()) {
    if (!defaults.has(key))
      throw InputError("config " + path.string() + ": unknown key '" + key + "'");
    merged.set(key, value);
  }
  return merged;
}

// ---- extract ---------------------------------------------------------------

void run_extract(const io::Config& config, const fs::path& mesh_dir,
                 const fs::path& out) {
  if (!fs::exists(mesh_dir))
    throw InputError("no such directory: " + mesh_dir.string());
  if (!fs::is_directory(mesh_dir))
    throw InputError("not a directory: " + mesh_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(mesh_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj" || ext == ".off") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw InputError("no .obj or .off meshes in " + mesh_dir.string());

  const feat::FeatureConfig base = feature_config(config);
  const uint64_t seed = seed_of(config);
  io::Table table;
  table.columns.push_back("shape_id");
  for (const auto& name : feat::FeatureVector::names()) table.columns.push_back(name);
  table.provenance = provenance(config, "features v1");

  std::set<std::string> seen;
  for (const auto& path : files) {
    const std::string id = path.stem().string();
    if (!seen.insert(id).second)
      throw InputError("duplicate shape id '" + id + "' in " + mesh_dir.string());
    const geom::Mesh mesh = geom::load_mesh(path);
    feat::FeatureConfig fc = base;
    // Keyed by id, not position, so adding a mesh never reseeds the others.
    fc.seed = derive_stream(derive_stream(seed, kStreamExtract), io::fnv1a64(id));
    const auto values = feat::extract_all(mesh, fc).values();
    std::vector<std::string> row{id};
    for (double v : values) row.push_back(io::format_double(v));
    table.add_row(std::move(row));
  }
  io::write_table(out / "features.csv", table);
  note(out / "features.csv", std::to_string(table.rows.size()) + " shapes");
}

// ---- fit-bt ----------------------------------------------------------------

void run_fit_bt(const io::Config& config, const fs::path& comparisons,
                const fs::path& out) {
  const std::string category = category_of(config);
  const auto all_records = read_comparisons(comparisons, category);

  std::vector<bt::ComparisonRecord> records;
  std::set<std::string> other_categories;
  for (const auto& r : all_records) {
    if (r.category == category)
      records.push_back(r);
    else
      other_categories.insert(r.category);
  }
  if (records.empty()) {
    std::string message = "no comparisons for category '" + category + "' in " +
                          comparisons.string();
    if (!other_categories.empty()) {
      message += " (file has:";
      for (const auto& c : other_categories) message += " '" + c + "'";
      message += ")";
    }
    throw InputError(message);
  }

  const bt::BTFit fit = bt::fit_bt(records, bt_config(config));

  std::vector<int> order(static_cast<size_t>(fit.registry.size()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return fit.registry.ids()[static_cast<size_t>(a)] <
           fit.registry.ids()[static_cast<size_t>(b)];
  });

  io::Table table;
  table.columns = {"shape_id", "beta", "se", "n_comparisons"};
  table.provenance = provenance(config, "scores v1");
  table.provenance["comparisons"] = std::to_string(records.size());
  table.provenance["iterations"] = std::to_string(fit.iterations);
  for (int i : order) {
    const auto k = static_cast<size_t>(i);
    table.add_row({fit.registry.ids()[k], io::format_double(fit.beta[k]),
                   io::format_double(fit.se[k]),
                   std::to_string(fit.n_comparisons[k])});
  }
  io::write_table(out / "scores.csv", table);
  note(out / "scores.csv", std::to_string(table.rows.size()) + " shapes, " +
                               std::to_string(records.size()) + " comparisons");
}

// ---- train -----------------------------------------------------------------

void run_train(const io::Config& config, const fs::path& dir) {
  const fs::path features_path = dir / "features.csv";
  const fs::path scores_path = dir / "scores.csv";
  const FeatureTable features = read_features(features_path);
  check_category(config, features_path, features.category);
  const io::Table scores = read_stage_table(scores_path, "scores v1");
  const int id_col = column_index(scores, scores_path, "shape_id");
  const int beta_col = column_index(scores, scores_path, "beta");
  const int count_col = column_index(scores, scores_path, "n_comparisons");

  std::map<std::string, std::pair<double, double>> target;  // id -> (beta, weight)
  for (size_t i = 0; i < scores.rows.size(); ++i) {
    const std::string& id = scores.rows[i][static_cast<size_t>(id_col)];
    const double beta = cell_double(scores, scores_path, i, beta_col);
    const double count = cell_double(scores, scores_path, i, count_col);
    if (!target.emplace(id, std::make_pair(beta, 1.0 / std::max(count, 1.0))).second)
      throw InputError(scores_path.string() + ": duplicate shape id '" + id + "'");
  }

  forest::Dataset dataset;
  dataset.feature_names = features.names;
  dataset.category = category_of(config);
  for (size_t i = 0; i < features.ids.size(); ++i) {
    const auto it = target.find(features.ids[i]);
    if (it == target.end()) continue;  // shape never compared; nothing to fit
    dataset.shape_ids.push_back(features.ids[i]);
    dataset.x.push_back(features.rows[i]);
    dataset.y.push_back(it->second.first);
    dataset.weights.push_back(it->second.second);
  }
  for (const auto& [id, unused] : target)
    if (std::find(features.ids.begin(), features.ids.end(), id) == features.ids.end())
      throw InputError("shape '" + id + "' has a score in " + scores_path.string() +
                       " but no features in " + features_path.string());
  if (dataset.x.empty())
    throw InputError("no shapes shared between " + features_path.string() + " and " +
                     scores_path.string());
  dataset.validate();

  const double test_fraction = config.get_double("forest.test_fraction", 0.2);
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InputError("config key 'forest.test_fraction': must be in (0, 1)");
  const int n = dataset.n_rows();
  const int n_test = static_cast<int>(std::lround(test_fraction * n));
  if (n_test < 2 || n - n_test < 4)
    throw InputError("train/test split of " + std::to_string(n) + " shapes at " +
                     io::format_double(test_fraction) +
                     " leaves too little data (need >= 2 test and >= 4 training rows)");

  const uint64_t seed = seed_of(config);
  std::vector<int> index(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) index[static_cast<size_t>(i)] = i;
  Rng split_rng(derive_stream(seed, kStreamSplit));
  split_rng.shuffle(index);
  std::vector<int> test_rows(index.begin(), index.begin() + n_test);
  std::vector<int> train_rows(index.begin() + n_test, index.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  const auto subset = [&](const std::vector<int>& rows) {
    forest::Dataset d;
    d.feature_names = dataset.feature_names;
    d.category = dataset.category;
    for (int i : rows) {
      const auto k = static_cast<size_t>(i);
      d.shape_ids.push_back(dataset.shape_ids[k]);
      d.x.push_back(dataset.x[k]);
      d.y.push_back(dataset.y[k]);
      d.weights.push_back(dataset.weights[k]);
    }
    return d;
  };
  forest::Dataset train_set = subset(train_rows);
  forest::Dataset test_set = subset(test_rows);

  const auto grid = grid_config(config);
  const int folds = config.get_int("forest.cv_folds", 5);
  const auto cv =
      forest::grid_search_cv(train_set, grid, folds, derive_stream(seed, kStreamCv));
  forest::ForestModel model =
      forest::train_forest(train_set, cv.best, derive_stream(seed, kStreamForest));
  model.category = dataset.category;

  const double oob = forest::oob_score(model, train_set);
  const auto predictions = forest::predict_batch(model, test_set.x);
  const double r2 = forest::r2(test_set.y, predictions);
  const double mae = forest::mae(test_set.y, predictions, test_set.weights);

  nlohmann::json doc = nlohmann::json::parse(forest::serialize_model(model));
  doc["provenance"] = {{"config", analysis_hash(config)},
                       {"seed", std::to_string(seed)}};
  write_json(dir / "model.json", doc);

  io::Table metrics;
  metrics.columns = {"metric", "value"};
  metrics.provenance = provenance(config, "metrics v1");
  metrics.add_row({"r2", io::format_double(r2)});
  metrics.add_row({"mae", io::format_double(mae)});
  metrics.add_row({"oob", io::format_double(oob)});
  metrics.add_row({"cv_r2", io::format_double(cv.best_score)});
  metrics.add_row({"n_train", std::to_string(train_set.n_rows())});
  metrics.add_row({"n_test", std::to_string(test_set.n_rows())});
  metrics.add_row({"n_trees", std::to_string(cv.best.n_trees)});
  metrics.add_row({"max_depth", std::to_string(cv.best.max_depth)});
  metrics.add_row({"min_samples_leaf", std::to_string(cv.best.min_samples_leaf)});
  metrics.add_row({"cv_folds", std::to_string(folds)});
  io::write_table(dir / "metrics.csv", metrics);

  char summary[160];
  std::snprintf(summary, sizeof(summary),
                "r2 %.3f, mae %.3f, oob %.3f; %d trees, depth %d, min leaf %d", r2,
                mae, oob, cv.best.n_trees, cv.best.max_depth,
                cv.best.min_samples_leaf);
  note(dir / "model.json", summary);
}

// ---- explain ---------------------------------------------------------------

void run_explain(const io::Config& config, const fs::path& dir) {
  const fs::path features_path = dir / "features.csv";
  const forest::ForestModel model = read_model(dir / "model.json");
  const FeatureTable features = read_features(features_path);
  check_category(config, features_path, features.category);
  const auto x = training_rows(model, features, features_path);

  const auto importance = explain::global_importance(model, x);
  std::vector<std::pair<std::string, double>> ranked(importance.begin(),
                                                     importance.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  io::Table shap;
  shap.columns = {"feature", "value"};
  shap.provenance = provenance(config, "shap v1");
  shap.provenance["samples"] = std::to_string(x.size());
  for (const auto& [feature, value] : ranked)
    shap.add_row({feature, io::format_double(value)});
  io::write_table(dir / "shap.csv", shap);

  const int top = std::min(config.get_int("explain.pdp_features", 3),
                           static_cast<int>(ranked.size()));
  const int grid_points = config.get_int("explain.pdp_grid", 20);
  io::Table pdp;
  pdp.columns = {"feature", "grid", "response"};
  pdp.provenance = provenance(config, "pdp v1");
  pdp.provenance["samples"] = std::to_string(x.size());
  for (int f = 0; f < top; ++f) {
    const auto& name = ranked[static_cast<size_t>(f)].first;
    int feature_index = -1;
    for (size_t j = 0; j < model.feature_names.size(); ++j)
      if (model.feature_names[j] == name) feature_index = static_cast<int>(j);
    const auto curve =
        explain::partial_dependence(model, x, feature_index, grid_points);
    for (size_t g = 0; g < curve.grid.size(); ++g)
      pdp.add_row({name, io::format_double(curve.grid[g]),
                   io::format_double(curve.response[g])});
  }
  io::write_table(dir / "pdp.csv", pdp);

  note(dir / "shap.csv", "top feature " + (ranked.empty() ? "?" : ranked[0].first));
  note(dir / "pdp.csv", std::to_string(top) + " features x " +
                            std::to_string(grid_points) + " grid points");
}

// ---- crosscat --------------------------------------------------------------

void run_crosscat(const io::Config& config, const std::vector<fs::path>& dirs,
                  const fs::path& out) {
  if (dirs.size() < 2)
    throw InputError("crosscat needs at least two per-category stage directories");

  crosscat::ImportanceMatrix imp;
  std::vector<std::vector<double>> samples;  // per-shape SHAP vectors, all groups
  std::vector<std::string> groups;
  for (const auto& dir : dirs) {
    const fs::path features_path = dir / "features.csv";
    const forest::ForestModel model = read_model(dir / "model.json");
    const FeatureTable features = read_features(features_path);
    const std::string category =
        features.category.empty() ? model.category : features.category;
    if (category.empty())
      throw InputError(features_path.string() + ": no category recorded");
    if (std::find(imp.categories.begin(), imp.categories.end(), category) !=
        imp.categories.end())
      throw InputError("category '" + category + "' appears in more than one directory");
    if (imp.categories.empty()) {
      imp.features = model.feature_names;
    } else if (model.feature_names != imp.features) {
      throw InputError(dir.string() +
                       ": model feature names differ from the first category's");
    }
    const auto x = training_rows(model, features, features_path);
    const auto importance = explain::global_importance(model, x);
    std::vector<double> row;
    row.reserve(imp.features.size());
    for (const auto& name : imp.features) row.push_back(importance.at(name));
    imp.categories.push_back(category);
    imp.values.push_back(std::move(row));

    for (const auto& explanation : explain::tree_shap_batch(model, x)) {
      samples.push_back(explanation.attributions);
      groups.push_back(category);
    }
  }

  std::string joined;
  for (const auto& c : imp.categories) joined += (joined.empty() ? "" : "+") + c;

  const auto correlation = crosscat::importance_correlation_matrix(imp);
  io::Table corr;
  corr.columns.push_back("category");
  for (const auto& c : imp.categories) corr.columns.push_back(c);
  corr.provenance = provenance(config, "importance-correlation v1");
  corr.provenance["category"] = joined;
  for (size_t i = 0; i < imp.categories.size(); ++i) {
    std::vector<std::string> row{imp.categories[i]};
    for (double v : correlation[i]) row.push_back(io::format_double(v));
    corr.add_row(std::move(row));
  }
  io::write_table(out / "importance_correlation.csv", corr);

  const auto dendrogram = crosscat::hierarchical_cluster(imp);
  nlohmann::json dendro_doc;
  dendro_doc["config"] = analysis_hash(config);
  dendro_doc["seed"] = seed_of(config);
  dendro_doc["labels"] = dendrogram.labels;
  dendro_doc["distance"] = "1 - spearman rho of importance vectors";
  dendro_doc["linkage"] = "average";
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : dendrogram.merges)
    merges.push_back({{"a", m.a}, {"b", m.b}, {"distance", m.distance},
                      {"size", m.size}});
  dendro_doc["merges"] = std::move(merges);
  write_json(out / "dendrogram.json", dendro_doc);

  const auto manova = crosscat::manova(samples, groups);
  io::Table tests;
  tests.columns = {"feature", "F", "p"};
  tests.provenance = provenance(config, "manova v1");
  tests.provenance["category"] = joined;
  tests.provenance["statistic"] = "wilks";
  tests.provenance["wilks"] = io::format_double(manova.statistic);
  tests.provenance["F"] = io::format_double(manova.f);
  tests.provenance["p"] = io::format_double(manova.p_value);
  tests.provenance["df1"] = io::format_double(manova.df1);
  tests.provenance["df2"] = io::format_double(manova.df2);
  tests.provenance["pseudo_inverse"] =
      manova.used_pseudo_inverse ? "true" : "false";
  for (size_t j = 0; j < imp.features.size(); ++j)
    tests.add_row({imp.features[j], io::format_double(manova.per_feature[j].f),
                   io::format_double(manova.per_feature[j].p)});
  io::write_table(out / "manova.csv", tests);

  note(out / "importance_correlation.csv",
       std::to_string(imp.categories.size()) + " categories");
  note(out / "dendrogram.json",
       std::to_string(dendrogram.merges.size()) + " merges");
  char manova_summary[96];
  std::snprintf(manova_summary, sizeof(manova_summary), "Wilks %.4f, p %.3g",
                manova.statistic, manova.p_value);
  note(out / "manova.csv", manova_summary);
}

// ---- synth -----------------------------------------------------------------

void run_synth(const io::Config& config, const fs::path& out) {
  const uint64_t seed = seed_of(config);
  const std::string category = category_of(config);
  const int n_shapes = config.get_int("synth.n_shapes", 40);
  const int n_comparisons = config.get_int("synth.n_comparisons", 1500);
  if (n_shapes < 2)
    throw InputError("config key 'synth.n_shapes': need at least 2 shapes");
  if (n_comparisons < 1)
    throw InputError("config key 'synth.n_comparisons': need at least 1");

  std::vector<synth::Generator> families;
  const std::string family_list = config.get("synth.families", "");
  if (!family_list.empty()) {
    std::stringstream ss(family_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trimmed(item);
      if (item.empty()) continue;
      try {
        families.push_back(synth::parse_generator(item));
      } catch (const InputError& e) {
        throw InputError(std::string("config key 'synth.families': ") + e.what());
      }
    }
  }

  const auto specs =
      synth::draw_corpus_specs(n_shapes, derive_stream(seed, kStreamCorpus), families);
  const fs::path mesh_dir = out / "meshes";
  const std::string stamp = "# " + provenance_comment(config) + "\n";
  for (int i = 0; i < n_shapes; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "s%04d.obj", i);
    const geom::Mesh mesh = synth::generate_shape(specs[static_cast<size_t>(i)]);
    io::write_text_atomic(mesh_dir / name, stamp + geom::format_obj(mesh));
  }
  std::cout << "wrote " << mesh_dir.string() << " (" << n_shapes << " meshes)\n";

  run_extract(config, mesh_dir, out);
  const FeatureTable features = read_features(out / "features.csv");

  const std::string driver = config.get("synth.driver", "S/V Ratio");
  int driver_index = -1;
  for (size_t j = 0; j < features.names.size(); ++j)
    if (features.names[j] == driver) driver_index = static_cast<int>(j);
  if (driver_index < 0) {
    std::string known;
    for (const auto& name : features.names)
      known += (known.empty() ? "" : ", ") + name;
    throw InputError("config key 'synth.driver': unknown feature '" + driver +
                     "' (features: " + known + ")");
  }

  synth::UtilitySpec utility;
  utility.linear.assign(features.names.size(), 0.0);
  utility.linear[static_cast<size_t>(driver_index)] =
      config.get_double("synth.driver_weight", 1.5);
  utility.noise_scale = config.get_double("synth.noise_scale", 0.15);
  synth::validate_utility(utility, static_cast<int>(features.names.size()));

  const auto utilities =
      synth::planted_utilities(features.rows, utility, derive_stream(seed, kStreamUtility));
  const auto records =
      synth::simulate_comparisons(features.ids, utilities, n_comparisons,
                                  derive_stream(seed, kStreamComparisons), category);

  io::Table comparisons;
  comparisons.columns = {"winner", "loser", "category"};
  comparisons.provenance = provenance(config, "comparisons v1");
  for (const auto& r : records)
    comparisons.add_row({r.winner, r.loser, r.category});
  io::write_table(out / "comparisons.csv", comparisons);
  note(out / "comparisons.csv", std::to_string(records.size()) + " records");

  run_fit_bt(config, out / "comparisons.csv", out);
  run_train(config, out);
  run_explain(config, out);

  const io::Table scores = read_stage_table(out / "scores.csv", "scores v1");
  const int id_col = column_index(scores, out / "scores.csv", "shape_id");
  const int beta_col = column_index(scores, out / "scores.csv", "beta");
  std::map<std::string, double> beta_by_id;
  for (size_t i = 0; i < scores.rows.size(); ++i)
    beta_by_id[scores.rows[i][static_cast<size_t>(id_col)]] =
        cell_double(scores, out / "scores.csv", i, beta_col);
  std::vector<double> beta_aligned, truth_aligned;
  for (size_t i = 0; i < features.ids.size(); ++i) {
    const auto it = beta_by_id.find(features.ids[i]);
    if (it == beta_by_id.end()) continue;  // shape never sampled into a comparison
    beta_aligned.push_back(it->second);
    truth_aligned.push_back(utilities[i]);
  }
  const double spearman_fit_truth =
      crosscat::spearman(beta_aligned, truth_aligned);

  const io::Table shap = read_stage_table(out / "shap.csv", "shap v1");
  const std::string top_feature = shap.rows.empty() ? "" : shap.rows[0][0];

  nlohmann::json doc;
  doc["config"] = analysis_hash(config);
  doc["seed"] = seed;
  doc["category"] = category;
  doc["n_shapes"] = n_shapes;
  doc["n_comparisons"] = n_comparisons;
  doc["utility"] = {{"driver", driver},
                    {"driver_index", driver_index},
                    {"weight", utility.linear[static_cast<size_t>(driver_index)]},
                    {"noise_scale", utility.noise_scale},
                    {"basis", "column z-scores of the extracted feature matrix"}};
  nlohmann::json truth = nlohmann::json::object();
  for (size_t i = 0; i < features.ids.size(); ++i) truth[features.ids[i]] = utilities[i];
  doc["utilities"] = std::move(truth);
  doc["spearman_fit_truth"] = spearman_fit_truth;
  doc["top_feature"] = top_feature;
  doc["driver_recovered"] = top_feature == driver;
  write_json(out / "experiment.json", doc);
  char summary[96];
  std::snprintf(summary, sizeof(summary), "spearman(fit, truth) %.4f, top %s",
                spearman_fit_truth, top_feature.c_str());
  note(out / "experiment.json", summary);

  run_report(config, out);
}

// ---- report ----------------------------------------------------------------

void run_report(const io::Config& config, const fs::path& dir) {
  const io::Table metrics = read_stage_table(dir / "metrics.csv", "metrics v1");
  const io::Table shap = read_stage_table(dir / "shap.csv", "shap v1");
  const io::Table pdp = read_stage_table(dir / "pdp.csv", "pdp v1");
  const std::string stamp = provenance_comment(config);

  std::map<std::string, double> metric;
  for (size_t i = 0; i < metrics.rows.size(); ++i)
    metric[metrics.rows[i][0]] = cell_double(metrics, dir / "metrics.csv", i, 1);
  for (const char* key : {"r2", "mae", "oob"})
    if (!metric.count(key))
      throw InputError((dir / "metrics.csv").string() + ": missing metric '" +
                       key + "'");

  nlohmann::json doc;
  doc["config"] = analysis_hash(config);
  doc["seed"] = seed_of(config);
  doc["category"] = category_of(config);
  doc["r2"] = metric.at("r2");
  doc["mae"] = metric.at("mae");
  doc["oob"] = metric.at("oob");
  nlohmann::json all_metrics = nlohmann::json::object();
  for (const auto& [key, value] : metric) all_metrics[key] = value;
  doc["metrics"] = std::move(all_metrics);

  std::vector<std::string> shap_labels;
  std::vector<double> shap_values;
  nlohmann::json importance = nlohmann::json::object();
  for (size_t i = 0; i < shap.rows.size(); ++i) {
    shap_labels.push_back(shap.rows[i][0]);
    shap_values.push_back(cell_double(shap, dir / "shap.csv", i, 1));
    importance[shap.rows[i][0]] = shap_values.back();
  }
  if (shap_labels.empty())
    throw InputError((dir / "shap.csv").string() + ": no features");
  doc["importance"] = std::move(importance);
  doc["top_feature"] = shap_labels.front();

  if (fs::exists(dir / "scores.csv")) {
    const io::Table scores = read_stage_table(dir / "scores.csv", "scores v1");
    const int beta_col = column_index(scores, dir / "scores.csv", "beta");
    double beta_min = 0.0, beta_max = 0.0;
    for (size_t i = 0; i < scores.rows.size(); ++i) {
      const double b = cell_double(scores, dir / "scores.csv", i, beta_col);
      if (i == 0) beta_min = beta_max = b;
      beta_min = std::min(beta_min, b);
      beta_max = std::max(beta_max, b);
    }
    doc["scores"] = {{"n_shapes", scores.rows.size()},
                     {"beta_min", beta_min},
                     {"beta_max", beta_max}};
  }
  if (fs::exists(dir / "experiment.json"))
    doc["truth"] = read_json(dir / "experiment.json");

  std::vector<fs::path> artifacts;
  io::write_text_atomic(dir / "importance.svg",
                        bar_chart_svg("Global feature importance (mean |SHAP|)",
                                      shap_labels, shap_values, stamp));
  artifacts.push_back(dir / "importance.svg");

  std::vector<Series> curves;
  for (size_t i = 0; i < pdp.rows.size(); ++i) {
    const std::string& feature = pdp.rows[i][0];
    if (curves.empty() || curves.back().name != feature)
      curves.push_back({feature, {}, {}});
    curves.back().x.push_back(cell_double(pdp, dir / "pdp.csv", i, 1));
    curves.back().y.push_back(cell_double(pdp, dir / "pdp.csv", i, 2));
  }
  if (curves.empty())
    throw InputError((dir / "pdp.csv").string() + ": no curves");
  io::write_text_atomic(
      dir / "pdp.svg",
      line_chart_svg("Partial dependence", curves, "feature value",
                     "predicted score", stamp));
  artifacts.push_back(dir / "pdp.svg");

  if (fs::exists(dir / "importance_correlation.csv")) {
    const io::Table corr = read_stage_table(dir / "importance_correlation.csv",
                                            "importance-correlation v1");
    std::vector<std::string> labels(corr.columns.begin() + 1, corr.columns.end());
    std::vector<std::vector<double>> matrix;
    for (size_t i = 0; i < corr.rows.size(); ++i) {
      std::vector<double> row;
      for (size_t j = 1; j < corr.columns.size(); ++j)
        row.push_back(cell_double(corr, dir / "importance_correlation.csv", i,
                                  static_cast<int>(j)));
      matrix.push_back(std::move(row));
    }
    io::write_text_atomic(
        dir / "correlation.svg",
        heatmap_svg("Cross-category importance correlation", labels, matrix, stamp));
    artifacts.push_back(dir / "correlation.svg");
    doc["crosscat"] = {{"categories", labels}};
  }
  if (fs::exists(dir / "dendrogram.json")) {
    const nlohmann::json dendro_doc = read_json(dir / "dendrogram.json");
    crosscat::Dendrogram dendrogram;
    try {
      dendrogram.labels = dendro_doc.at("labels").get<std::vector<std::string>>();
      for (const auto& m : dendro_doc.at("merges"))
        dendrogram.merges.push_back({m.at("a").get<int>(), m.at("b").get<int>(),
                                     m.at("distance").get<double>(),
                                     m.at("size").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw InputError((dir / "dendrogram.json").string() + ": " + e.what());
    }
    io::write_text_atomic(
        dir / "dendrogram.svg",
        dendrogram_svg("Category clustering (1 - rho, average linkage)",
                       dendrogram, stamp));
    artifacts.push_back(dir / "dendrogram.svg");
  }

  write_json(dir / "report.json", doc);
  std::string names = "report.json";
  for (const auto& p : artifacts) names += ", " + p.filename().string();
  note(dir / "report.json", names);
}

}  // namespace shaperank::cli

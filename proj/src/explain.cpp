#include "shaperank/explain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <vector>

#include "shaperank/core/error.hpp"

namespace shaperank::explain {

namespace {

using forest::Tree;
using forest::TreeNode;

// One step of the feature path threaded through the recursion. zero_fraction
// is the share of cover flowing down when the feature is unknown,
// one_fraction is 1 when the sample follows this branch and 0 otherwise.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

using Path = std::vector<PathElement>;

void extend(Path& m, double zero_fraction, double one_fraction, int feature) {
  const int d = static_cast<int>(m.size());
  m.push_back({feature, zero_fraction, one_fraction, d == 0 ? 1.0 : 0.0});
  for (int i = d - 1; i >= 0; --i) {
    m[static_cast<size_t>(i + 1)].pweight += one_fraction *
                                             m[static_cast<size_t>(i)].pweight *
                                             (i + 1) / (d + 1);
    m[static_cast<size_t>(i)].pweight =
        zero_fraction * m[static_cast<size_t>(i)].pweight * (d - i) / (d + 1);
  }
}

void unwind(Path& m, int index) {
  const int d = static_cast<int>(m.size()) - 1;
  const double one = m[static_cast<size_t>(index)].one_fraction;
  const double zero = m[static_cast<size_t>(index)].zero_fraction;
  double next = m[static_cast<size_t>(d)].pweight;
  for (int i = d - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = m[static_cast<size_t>(i)].pweight;
      m[static_cast<size_t>(i)].pweight = next * (d + 1) / ((i + 1) * one);
      next = tmp - m[static_cast<size_t>(i)].pweight * zero * (d - i) / (d + 1);
    } else {
      m[static_cast<size_t>(i)].pweight =
          m[static_cast<size_t>(i)].pweight * (d + 1) / (zero * (d - i));
    }
  }
  for (int i = index; i < d; ++i) {
    m[static_cast<size_t>(i)].feature = m[static_cast<size_t>(i + 1)].feature;
    m[static_cast<size_t>(i)].zero_fraction = m[static_cast<size_t>(i + 1)].zero_fraction;
    m[static_cast<size_t>(i)].one_fraction = m[static_cast<size_t>(i + 1)].one_fraction;
  }
  m.pop_back();
}

double unwound_sum(const Path& m, int index) {
  const int d = static_cast<int>(m.size()) - 1;
  const double one = m[static_cast<size_t>(index)].one_fraction;
  const double zero = m[static_cast<size_t>(index)].zero_fraction;
  double next = m[static_cast<size_t>(d)].pweight;
  double total = 0.0;
  for (int i = d - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next * (d + 1) / ((i + 1) * one);
      total += tmp;
      next = m[static_cast<size_t>(i)].pweight - tmp * zero * (d - i) / (d + 1);
    } else {
      total += m[static_cast<size_t>(i)].pweight * (d + 1) / (zero * (d - i));
    }
  }
  return total;
}

void shap_recurse(const Tree& tree, const std::vector<double>& x, int node_index,
                  Path m, double zero_fraction, double one_fraction,
                  int parent_feature, std::vector<double>& phi) {
  extend(m, zero_fraction, one_fraction, parent_feature);
  const TreeNode& node = tree.nodes[static_cast<size_t>(node_index)];
  if (node.feature < 0) {
    for (int i = 1; i < static_cast<int>(m.size()); ++i) {
      const double w = unwound_sum(m, i);
      phi[static_cast<size_t>(m[static_cast<size_t>(i)].feature)] +=
          w * (m[static_cast<size_t>(i)].one_fraction -
               m[static_cast<size_t>(i)].zero_fraction) *
          node.value;
    }
    return;
  }
  const bool go_left = x[static_cast<size_t>(node.feature)] <= node.threshold;
  const int hot = go_left ? node.left : node.right;
  const int cold = go_left ? node.right : node.left;
  const double hot_cover = tree.nodes[static_cast<size_t>(hot)].cover;
  const double cold_cover = tree.nodes[static_cast<size_t>(cold)].cover;

  double incoming_zero = 1.0;
  double incoming_one = 1.0;
  for (int k = 1; k < static_cast<int>(m.size()); ++k) {
    if (m[static_cast<size_t>(k)].feature != node.feature) continue;
    incoming_zero = m[static_cast<size_t>(k)].zero_fraction;
    incoming_one = m[static_cast<size_t>(k)].one_fraction;
    unwind(m, k);
    break;
  }
  shap_recurse(tree, x, hot, m, incoming_zero * hot_cover / node.cover,
               incoming_one, node.feature, phi);
  shap_recurse(tree, x, cold, m, incoming_zero * cold_cover / node.cover, 0.0,
               node.feature, phi);
}

std::vector<double> tree_phi(const Tree& tree, const std::vector<double>& x,
                             int n_features) {
  std::vector<double> phi(static_cast<size_t>(n_features), 0.0);
  if (tree.nodes.size() == 1) return phi;  // constant tree attributes nothing
  shap_recurse(tree, x, 0, {}, 1.0, 1.0, -1, phi);
  return phi;
}

}  // namespace

ShapExplanation tree_shap(const forest::ForestModel& model,
                          const std::vector<double>& x) {
  if (x.size() != static_cast<size_t>(model.n_features()))
    throw InputError("feature vector length does not match the trained model");
  if (model.trees.empty()) throw InputError("model has no trees");
  ShapExplanation out;
  out.attributions.assign(x.size(), 0.0);
  const double n_trees = static_cast<double>(model.trees.size());
  for (const Tree& tree : model.trees) {
    const std::vector<double> phi = tree_phi(tree, x, model.n_features());
    for (size_t j = 0; j < x.size(); ++j) out.attributions[j] += phi[j];
    out.base_value += tree.nodes[0].value;
  }
  for (double& v : out.attributions) v /= n_trees;
  out.base_value /= n_trees;
  out.prediction = forest::predict(model, x);
  return out;
}

std::vector<ShapExplanation> tree_shap_batch(
    const forest::ForestModel& model, const std::vector<std::vector<double>>& x) {
  std::vector<ShapExplanation> out(x.size());
  std::exception_ptr failure = nullptr;
  const long long n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<size_t>(i)] = tree_shap(model, x[static_cast<size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::map<std::string, double> global_importance(
    const forest::ForestModel& model, const std::vector<std::vector<double>>& x) {
  if (x.empty()) throw InputError("global importance needs at least one row");
  const auto explanations = tree_shap_batch(model, x);
  std::map<std::string, double> importance;
  for (int j = 0; j < model.n_features(); ++j) {
    // Summing in sorted order makes the mean independent of row order.
    std::vector<double> magnitudes;
    magnitudes.reserve(x.size());
    for (const auto& e : explanations)
      magnitudes.push_back(std::abs(e.attributions[static_cast<size_t>(j)]));
    std::sort(magnitudes.begin(), magnitudes.end());
    double sum = 0.0;
    for (double m : magnitudes) sum += m;
    importance[model.feature_names[static_cast<size_t>(j)]] =
        sum / static_cast<double>(x.size());
  }
  return importance;
}

PdpCurve partial_dependence(const forest::ForestModel& model,
                            const std::vector<std::vector<double>>& x,
                            int feature, int grid_size) {
  if (feature < 0 || feature >= model.n_features())
    throw InputError("partial dependence feature index out of range");
  if (grid_size < 2) throw InputError("partial dependence needs a grid of >= 2 points");
  if (x.empty()) throw InputError("partial dependence needs at least one row");
  for (const auto& row : x)
    if (row.size() != static_cast<size_t>(model.n_features()))
      throw InputError("feature vector length does not match the trained model");

  std::vector<double> column;
  column.reserve(x.size());
  for (const auto& row : x) column.push_back(row[static_cast<size_t>(feature)]);
  std::sort(column.begin(), column.end());

  PdpCurve curve;
  curve.feature = model.feature_names[static_cast<size_t>(feature)];
  const double n = static_cast<double>(column.size());
  for (int g = 0; g < grid_size; ++g) {
    // Equally spaced quantile levels from 0 to 1, linearly interpolated.
    const double q = static_cast<double>(g) / (grid_size - 1);
    const double pos = q * (n - 1.0);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, column.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    const double value = column[lo] + frac * (column[hi] - column[lo]);
    if (!curve.grid.empty() && value <= curve.grid.back()) continue;
    curve.grid.push_back(value);
  }
  if (curve.grid.size() < 2)
    throw InputError("partial dependence undefined for a constant feature");

  for (const double v : curve.grid) {
    double sum = 0.0;
    for (const auto& row : x) {
      std::vector<double> clamped = row;
      clamped[static_cast<size_t>(feature)] = v;
      sum += forest::predict(model, clamped);
    }
    curve.response.push_back(sum / n);
  }
  return curve;
}

std::map<std::string, double> pearson_feature_scan(const forest::Dataset& dataset) {
  forest::Dataset d = dataset;
  d.validate();
  if (d.n_rows() < 2) throw InputError("pearson scan needs at least two rows");
  const double n = static_cast<double>(d.n_rows());
  double y_mean = 0.0;
  for (double v : d.y) y_mean += v;
  y_mean /= n;
  double y_var = 0.0;
  for (double v : d.y) y_var += (v - y_mean) * (v - y_mean);

  std::map<std::string, double> result;
  for (int j = 0; j < d.n_features(); ++j) {
    double x_mean = 0.0;
    for (int i = 0; i < d.n_rows(); ++i)
      x_mean += d.x[static_cast<size_t>(i)][static_cast<size_t>(j)];
    x_mean /= n;
    double x_var = 0.0, cov = 0.0;
    for (int i = 0; i < d.n_rows(); ++i) {
      const double dx = d.x[static_cast<size_t>(i)][static_cast<size_t>(j)] - x_mean;
      x_var += dx * dx;
      cov += dx * (d.y[static_cast<size_t>(i)] - y_mean);
    }
    if (x_var <= 0.0 || y_var <= 0.0) continue;  // undefined, reported missing
    result[d.feature_names[static_cast<size_t>(j)]] = cov / std::sqrt(x_var * y_var);
  }
  return result;
}

}  // namespace shaperank::explain

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace shaperank::bt {

// One pairwise preference: `winner` was chosen over `loser`. Repeated
// identical records are legitimate independent trials. The category tag
// groups records for per-category fitting; worker/session tags, if present in
// the source data, are dropped at ingest because the model ignores them.
struct ComparisonRecord {
  std::string winner;
  std::string loser;
  std::string category;
};

// Stable shape-id <-> dense index mapping, in first-seen order.
class ShapeRegistry {
 public:
  int add(const std::string& id);            // idempotent
  int index_of(const std::string& id) const;  // throws InputError when unknown
  bool contains(const std::string& id) const;
  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }

  static ShapeRegistry from_comparisons(const std::vector<ComparisonRecord>& comparisons);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
};

// Sparse +1/-1 design: one row per comparison, +1 at the winner column, -1 at
// the loser column. Stored as index pairs since rows have exactly two
// nonzeros.
struct DesignMatrix {
  int n_shapes = 0;
  std::vector<std::pair<int, int>> rows;  // (winner index, loser index)

  int nonzeros() const { return 2 * static_cast<int>(rows.size()); }
  double row_dot(int row, const std::vector<double>& beta) const {
    return beta[rows[static_cast<size_t>(row)].first] -
           beta[rows[static_cast<size_t>(row)].second];
  }
};

// Throws InputError on winner == loser or an id missing from the registry.
DesignMatrix build_design_matrix(const std::vector<ComparisonRecord>& comparisons,
                                 const ShapeRegistry& registry);

struct BTConfig {
  double lambda = 0.01;      // L2 penalty: objective is loglik - lambda * |beta|^2
  double tolerance = 1e-8;   // gradient infinity-norm stopping threshold
  int max_iterations = 100;
};

struct BTFit {
  ShapeRegistry registry;
  std::vector<double> beta;        // centered: sum over compared shapes = 0
  std::vector<double> se;          // Fisher standard errors; +inf for isolated shapes
  std::vector<int> n_comparisons;  // appearances per shape (either side)
  std::vector<bool> isolated;      // true when n_comparisons == 0
  double lambda = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;           // penalized gradient inf-norm at exit
  double log_likelihood = 0.0;          // unpenalized, at the fitted beta
  std::vector<double> objective_trace;  // penalized objective per accepted step
};

// P(i beats j) via a numerically stable sigmoid of beta_i - beta_j. Always in
// (0, 1); the two call orders sum to exactly 1.0 in floating point.
double bt_probability(double beta_i, double beta_j);

// Sum of log bt_probability over comparisons; <= 0, translation invariant.
double log_likelihood(const std::vector<double>& beta, const DesignMatrix& design);
double log_likelihood(const std::vector<double>& beta,
                      const std::vector<ComparisonRecord>& comparisons,
                      const ShapeRegistry& registry);

// Penalized objective and its gradient, exposed for convergence diagnostics.
double bt_objective(const std::vector<double>& beta, const DesignMatrix& design,
                    double lambda);
std::vector<double> bt_gradient(const std::vector<double>& beta,
                                const DesignMatrix& design, double lambda);

// Damped Newton ascent on the penalized log-likelihood. Starts from beta = 0,
// halves the step while the objective would decrease, stops when the gradient
// infinity-norm drops below tolerance. Shapes with no comparisons keep
// beta = 0 and are flagged isolated with infinite standard error. Throws
// ConvergenceError (carrying the last iterate) when max_iterations pass
// without meeting the tolerance.
BTFit fit_bt(const std::vector<ComparisonRecord>& comparisons,
             const ShapeRegistry& registry, const BTConfig& config = {});
// Convenience overload: registry built from the comparisons themselves.
BTFit fit_bt(const std::vector<ComparisonRecord>& comparisons,
             const BTConfig& config = {});

// sqrt(diag((H + 2*lambda*I)^-1)) with H the negative log-likelihood Hessian
// at beta. With lambda == 0 the Hessian has the constant vector in its kernel;
// the pseudo-inverse handles that gauge direction, but a comparison graph that
// is disconnected (among compared shapes) makes score differences across
// components unidentifiable, which is reported as InputError.
std::vector<double> standard_errors(const std::vector<double>& beta,
                                    const DesignMatrix& design, double lambda);
std::vector<double> standard_errors(const BTFit& fit,
                                    const std::vector<ComparisonRecord>& comparisons);

// Groups records by category and fits each group independently (parallel
// across categories, deterministic per group).
std::map<std::string, BTFit> fit_bt_by_category(
    const std::vector<ComparisonRecord>& comparisons, const BTConfig& config = {});

}  // namespace shaperank::bt

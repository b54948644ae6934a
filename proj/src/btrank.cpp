#include "shaperank/btrank/btrank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "shaperank/core/error.hpp"

namespace shaperank::bt {

namespace {

// Smallest probability bt_probability will report. 2^-53 keeps the exact
// complement property: 1 - 2^-53 is representable and the pair sums to 1.
constexpr double kMinProb = 1.1102230246251565e-16;

}  // namespace

int ShapeRegistry::add(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, static_cast<int>(ids_.size()));
  if (inserted) ids_.push_back(id);
  return it->second;
}

int ShapeRegistry::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown shape id '" + id + "'");
  return it->second;
}

bool ShapeRegistry::contains(const std::string& id) const {
  return index_.count(id) != 0;
}

ShapeRegistry ShapeRegistry::from_comparisons(
    const std::vector<ComparisonRecord>& comparisons) {
  ShapeRegistry reg;
  for (const auto& rec : comparisons) {
    reg.add(rec.winner);
    reg.add(rec.loser);
  }
  return reg;
}

DesignMatrix build_design_matrix(const std::vector<ComparisonRecord>& comparisons,
                                 const ShapeRegistry& registry) {
  DesignMatrix design;
  design.n_shapes = registry.size();
  design.rows.reserve(comparisons.size());
  for (const auto& rec : comparisons) {
    if (rec.winner == rec.loser)
      throw InputError("comparison with winner == loser ('" + rec.winner + "')");
    design.rows.emplace_back(registry.index_of(rec.winner),
                             registry.index_of(rec.loser));
  }
  return design;
}

double bt_probability(double beta_i, double beta_j) {
  const double d = beta_i - beta_j;
  const double e = std::exp(-std::abs(d));
  double q = e / (1.0 + e);  // the smaller of the two probabilities
  if (q < kMinProb) q = kMinProb;
  return d >= 0.0 ? 1.0 - q : q;
}

double log_likelihood(const std::vector<double>& beta, const DesignMatrix& design) {
  double ll = 0.0;
  for (const auto& [w, l] : design.rows) {
    const double d = beta[w] - beta[l];
    // log sigmoid(d), computed without overflow on either tail.
    ll += d >= 0.0 ? -std::log1p(std::exp(-d)) : d - std::log1p(std::exp(d));
  }
  return ll;
}

double log_likelihood(const std::vector<double>& beta,
                      const std::vector<ComparisonRecord>& comparisons,
                      const ShapeRegistry& registry) {
  return log_likelihood(beta, build_design_matrix(comparisons, registry));
}

double bt_objective(const std::vector<double>& beta, const DesignMatrix& design,
                    double lambda) {
  double penalty = 0.0;
  for (double b : beta) penalty += b * b;
  return log_likelihood(beta, design) - lambda * penalty;
}

std::vector<double> bt_gradient(const std::vector<double>& beta,
                                const DesignMatrix& design, double lambda) {
  std::vector<double> grad(beta.size(), 0.0);
  for (const auto& [w, l] : design.rows) {
    const double d = beta[w] - beta[l];
    const double e = std::exp(-std::abs(d));
    const double q = e / (1.0 + e);
    const double one_minus_p = d >= 0.0 ? q : 1.0 - q;  // 1 - P(winner beats loser)
    grad[w] += one_minus_p;
    grad[l] -= one_minus_p;
  }
  for (size_t i = 0; i < beta.size(); ++i) grad[i] -= 2.0 * lambda * beta[i];
  return grad;
}

namespace {

Eigen::MatrixXd negative_hessian(const std::vector<double>& beta,
                                 const DesignMatrix& design, double lambda) {
  const int n = design.n_shapes;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [w, l] : design.rows) {
    const double d = beta[w] - beta[l];
    const double e = std::exp(-std::abs(d));
    const double q = e / (1.0 + e);
    const double wgt = q * (1.0 - q);  // p(1-p), symmetric in the sign of d
    h(w, w) += wgt;
    h(l, l) += wgt;
    h(w, l) -= wgt;
    h(l, w) -= wgt;
  }
  for (int i = 0; i < n; ++i) h(i, i) += 2.0 * lambda;
  return h;
}

// Components of the comparison graph restricted to shapes that appear in at
// least one record. Used only for the lambda == 0 identifiability check.
int compared_components(const DesignMatrix& design) {
  std::vector<int> parent(static_cast<size_t>(design.n_shapes));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> compared(static_cast<size_t>(design.n_shapes), 0);
  auto find = [&](int a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  };
  for (const auto& [w, l] : design.rows) {
    compared[static_cast<size_t>(w)] = compared[static_cast<size_t>(l)] = 1;
    parent[static_cast<size_t>(find(w))] = find(l);
  }
  std::vector<char> seen(static_cast<size_t>(design.n_shapes), 0);
  int components = 0;
  for (int i = 0; i < design.n_shapes; ++i)
    if (compared[static_cast<size_t>(i)] && !seen[static_cast<size_t>(find(i))]) {
      seen[static_cast<size_t>(find(i))] = 1;
      ++components;
    }
  return components;
}

}  // namespace

std::vector<double> standard_errors(const std::vector<double>& beta,
                                    const DesignMatrix& design, double lambda) {
  const int n = design.n_shapes;
  std::vector<char> compared(static_cast<size_t>(n), 0);
  for (const auto& [w, l] : design.rows)
    compared[static_cast<size_t>(w)] = compared[static_cast<size_t>(l)] = 1;
  std::vector<int> m_index;
  for (int i = 0; i < n; ++i)
    if (compared[static_cast<size_t>(i)]) m_index.push_back(i);
  const int m = static_cast<int>(m_index.size());

  std::vector<double> se(static_cast<size_t>(n),
                         std::numeric_limits<double>::infinity());
  if (m == 0) return se;  // nothing identifiable, everything isolated

  const Eigen::MatrixXd h = negative_hessian(beta, design, lambda);
  Eigen::MatrixXd block(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      block(a, b) = h(m_index[static_cast<size_t>(a)], m_index[static_cast<size_t>(b)]);

  Eigen::MatrixXd cov;
  if (lambda > 0.0) {
    // Reported scores are centered, so the relevant covariance is that of the
    // centered estimate: project the shared-offset gauge mode (eigenvalue
    // 2*lambda, pure reporting convention) out of (H + 2*lambda*I)^-1.
    // Without the projection that near-null mode swamps every diagonal entry.
    const Eigen::MatrixXd sigma = block.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd p =
        Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
    cov = p * sigma * p;
  } else {
    if (compared_components(design) > 1)
      throw InputError(
          "standard errors undefined: lambda = 0 and the comparison graph is "
          "disconnected");
    // The constant vector spans the Hessian kernel; the pseudo-inverse
    // inverts on its complement, which is exactly the centered subspace.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(block);
    cov = cod.pseudoInverse();
  }
  for (int a = 0; a < m; ++a)
    se[static_cast<size_t>(m_index[static_cast<size_t>(a)])] =
        std::sqrt(std::max(cov(a, a), 0.0));
  return se;
}

std::vector<double> standard_errors(const BTFit& fit,
                                    const std::vector<ComparisonRecord>& comparisons) {
  return standard_errors(fit.beta, build_design_matrix(comparisons, fit.registry),
                         fit.lambda);
}

BTFit fit_bt(const std::vector<ComparisonRecord>& comparisons,
             const ShapeRegistry& registry, const BTConfig& config) {
  const int n = registry.size();
  if (n == 0) throw InputError("bt fit: empty shape registry");
  if (config.lambda < 0.0) throw InputError("bt fit: lambda must be >= 0");
  const DesignMatrix design = build_design_matrix(comparisons, registry);

  BTFit fit;
  fit.registry = registry;
  fit.lambda = config.lambda;
  fit.n_comparisons.assign(static_cast<size_t>(n), 0);
  for (const auto& [w, l] : design.rows) {
    ++fit.n_comparisons[static_cast<size_t>(w)];
    ++fit.n_comparisons[static_cast<size_t>(l)];
  }
  fit.isolated.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    fit.isolated[static_cast<size_t>(i)] = fit.n_comparisons[static_cast<size_t>(i)] == 0;

  std::vector<double> beta(static_cast<size_t>(n), 0.0);
  auto center = [&] {
    double sum = 0.0;
    int m = 0;
    for (int i = 0; i < n; ++i)
      if (!fit.isolated[static_cast<size_t>(i)]) {
        sum += beta[static_cast<size_t>(i)];
        ++m;
      }
    if (m == 0) return;
    const double mean = sum / m;
    for (int i = 0; i < n; ++i)
      if (!fit.isolated[static_cast<size_t>(i)]) beta[static_cast<size_t>(i)] -= mean;
  };

  double objective = bt_objective(beta, design, config.lambda);
  fit.objective_trace.push_back(objective);
  std::vector<double> grad = bt_gradient(beta, design, config.lambda);
  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  int iter = 0;
  double gnorm = inf_norm(grad);
  while (gnorm >= config.tolerance && iter < config.max_iterations) {
    ++iter;
    Eigen::MatrixXd h = negative_hessian(beta, design, config.lambda);
    if (config.lambda == 0.0) {
      // Tiny ridge to make the gauge-singular system solvable; re-centering
      // below keeps the iterate in the sum-zero slice the ridge prefers.
      const double ridge = 1e-12 * (1.0 + h.diagonal().maxCoeff());
      h.diagonal().array() += ridge;
    }
    Eigen::Map<const Eigen::VectorXd> g(grad.data(), n);
    const Eigen::VectorXd step = h.ldlt().solve(g);

    double t = 1.0;
    std::vector<double> candidate(static_cast<size_t>(n));
    double cand_obj = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 60; ++halving) {
      for (int i = 0; i < n; ++i)
        candidate[static_cast<size_t>(i)] = beta[static_cast<size_t>(i)] + t * step(i);
      cand_obj = bt_objective(candidate, design, config.lambda);
      if (cand_obj >= objective - 1e-12 * (1.0 + std::abs(objective))) break;
      t *= 0.5;
    }
    beta = candidate;
    if (config.lambda == 0.0) center();
    objective = cand_obj;
    fit.objective_trace.push_back(objective);
    grad = bt_gradient(beta, design, config.lambda);
    gnorm = inf_norm(grad);
  }

  if (gnorm >= config.tolerance) {
    throw ConvergenceError(
        "bt fit did not converge: gradient norm " + std::to_string(gnorm) + " after " +
            std::to_string(iter) + " iterations",
        gnorm, iter, beta);
  }

  fit.iterations = iter;
  fit.gradient_norm = gnorm;
  center();
  fit.beta = beta;
  fit.log_likelihood = log_likelihood(beta, design);
  fit.se = standard_errors(beta, design, config.lambda);
  for (int i = 0; i < n; ++i)
    if (fit.isolated[static_cast<size_t>(i)])
      fit.se[static_cast<size_t>(i)] = std::numeric_limits<double>::infinity();
  return fit;
}

BTFit fit_bt(const std::vector<ComparisonRecord>& comparisons, const BTConfig& config) {
  return fit_bt(comparisons, ShapeRegistry::from_comparisons(comparisons), config);
}

std::map<std::string, BTFit> fit_bt_by_category(
    const std::vector<ComparisonRecord>& comparisons, const BTConfig& config) {
  std::map<std::string, std::vector<ComparisonRecord>> groups;
  for (const auto& rec : comparisons) groups[rec.category].push_back(rec);
  const auto& const_groups = groups;  // read-only from here: lookups are thread-safe
  std::vector<const std::string*> keys;
  keys.reserve(groups.size());
  for (const auto& [key, recs] : const_groups) keys.push_back(&key);

  std::map<std::string, BTFit> fits;
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < static_cast<long long>(keys.size()); ++k) {
    try {
      BTFit fit = fit_bt(const_groups.at(*keys[static_cast<size_t>(k)]), config);
#pragma omp critical
      fits.emplace(*keys[static_cast<size_t>(k)], std::move(fit));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return fits;
}

}  // namespace shaperank::bt

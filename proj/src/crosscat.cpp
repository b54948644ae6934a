#include "shaperank/crosscat/crosscat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "shaperank/core/error.hpp"

namespace shaperank::crosscat {

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (v[static_cast<size_t>(a)] != v[static_cast<size_t>(b)])
      return v[static_cast<size_t>(a)] < v[static_cast<size_t>(b)];
    return a < b;
  });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[static_cast<size_t>(idx[j + 1])] == v[static_cast<size_t>(idx[i])]) ++j;
    // 1-based ranks i+1 .. j+1 share their average.
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[static_cast<size_t>(idx[k])] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0)
    throw InputError("correlation undefined for constant input");
  return num / std::sqrt(va * vb);
}

void check_importance_matrix(const ImportanceMatrix& imp) {
  if (imp.categories.size() < 2)
    throw InputError("need at least two categories");
  if (imp.values.size() != imp.categories.size())
    throw InputError("importance matrix row count does not match categories");
  for (const auto& row : imp.values)
    if (row.size() != imp.features.size())
      throw InputError("importance matrix row length does not match features");
}

double betacf(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  return h;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("spearman needs equal-length inputs");
  if (x.size() < 3) throw InputError("spearman needs at least three observations");
  return pearson(average_ranks(x), average_ranks(y));
}

std::vector<std::vector<double>> importance_correlation_matrix(
    const ImportanceMatrix& imp) {
  check_importance_matrix(imp);
  const size_t c = imp.categories.size();
  std::vector<std::vector<double>> out(c, std::vector<double>(c, 1.0));
  for (size_t i = 0; i < c; ++i)
    for (size_t j = i + 1; j < c; ++j) {
      const double rho = spearman(imp.values[i], imp.values[j]);
      out[i][j] = rho;
      out[j][i] = rho;  // mirrored, so symmetry is exact by construction
    }
  return out;
}

Dendrogram hierarchical_cluster(const ImportanceMatrix& imp) {
  check_importance_matrix(imp);
  const int n = static_cast<int>(imp.categories.size());

  struct Cluster {
    int id;
    int size;
  };
  std::vector<Cluster> active;
  for (int i = 0; i < n; ++i) active.push_back({i, 1});
  // dist[i][j] between active[i] and active[j]; average linkage keeps this
  // equal to the mean pairwise leaf distance between the two clusters.
  std::vector<std::vector<double>> dist(static_cast<size_t>(n),
                                        std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = 1.0 - spearman(imp.values[static_cast<size_t>(i)],
                                      imp.values[static_cast<size_t>(j)]);
      dist[static_cast<size_t>(i)][static_cast<size_t>(j)] = d;
      dist[static_cast<size_t>(j)][static_cast<size_t>(i)] = d;
    }

  Dendrogram tree;
  tree.labels = imp.categories;
  int next_id = n;
  while (active.size() > 1) {
    size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < active.size(); ++i)
      for (size_t j = i + 1; j < active.size(); ++j)
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
    const Cluster a = active[bi];
    const Cluster b = active[bj];
    tree.merges.push_back({std::min(a.id, b.id), std::max(a.id, b.id), best,
                           a.size + b.size});

    // Replace cluster bi with the merge; update distances by size-weighted
    // average; drop bj.
    for (size_t k = 0; k < active.size(); ++k) {
      if (k == bi || k == bj) continue;
      const double d = (a.size * dist[bi][k] + b.size * dist[bj][k]) /
                       static_cast<double>(a.size + b.size);
      dist[bi][k] = d;
      dist[k][bi] = d;
    }
    active[bi] = {next_id++, a.size + b.size};
    active.erase(active.begin() + static_cast<long>(bj));
    dist.erase(dist.begin() + static_cast<long>(bj));
    for (auto& row : dist) row.erase(row.begin() + static_cast<long>(bj));
  }
  return tree;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw InputError("incomplete beta needs positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double f_cdf(double f, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0) throw InputError("F distribution needs positive df");
  if (f <= 0.0) return 0.0;
  const double x = df1 * f / (df1 * f + df2);
  return regularized_incomplete_beta(df1 / 2.0, df2 / 2.0, x);
}

ManovaResult manova(const std::vector<std::vector<double>>& samples,
                    const std::vector<std::string>& groups,
                    const ManovaConfig& config) {
  const size_t n = samples.size();
  if (groups.size() != n) throw InputError("group labels must match sample count");
  if (n == 0) throw InputError("manova needs samples");
  const size_t p = samples[0].size();
  if (p == 0) throw InputError("manova needs at least one feature");
  for (const auto& row : samples)
    if (row.size() != p) throw InputError("ragged sample matrix");

  std::map<std::string, std::vector<int>> members;
  for (size_t i = 0; i < n; ++i) members[groups[i]].push_back(static_cast<int>(i));
  const size_t g = members.size();
  if (g < 2) throw InputError("manova needs at least two groups");
  for (const auto& [label, rows] : members)
    if (rows.size() <= p)
      throw InputError("group '" + label + "' needs more samples than features");

  Eigen::MatrixXd x(n, p);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j) x(static_cast<long>(i), static_cast<long>(j)) = samples[i][j];
  const Eigen::RowVectorXd grand = x.colwise().mean();

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [label, rows] : members) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
    for (int r : rows) mean += x.row(r);
    mean /= static_cast<double>(rows.size());
    const Eigen::RowVectorXd dm = mean - grand;
    h += static_cast<double>(rows.size()) * dm.transpose() * dm;
    for (int r : rows) {
      const Eigen::RowVectorXd d = x.row(r) - mean;
      e += d.transpose() * d;
    }
  }

  ManovaResult result;
  result.statistic_kind = config.statistic;

  // Eigenvalues of E^-1 H via whitening; falls back to the pseudo-inverse on
  // the non-null subspace when E is rank deficient (collinear columns).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
  const Eigen::VectorXd evals = es.eigenvalues();
  const double emax = evals.cwiseAbs().maxCoeff();
  const double tol = std::max(emax, 1.0) * 1e-12;
  std::vector<int> keep;
  for (long i = 0; i < evals.size(); ++i)
    if (evals(i) > tol) keep.push_back(static_cast<int>(i));
  const size_t rank = keep.size();
  if (rank == 0) throw InputError("within-group scatter is identically zero");
  result.used_pseudo_inverse = rank < p;

  Eigen::MatrixXd whiten(p, rank);
  for (size_t k = 0; k < rank; ++k)
    whiten.col(static_cast<long>(k)) =
        es.eigenvectors().col(keep[k]) / std::sqrt(evals(keep[k]));
  const Eigen::MatrixXd m = whiten.transpose() * h * whiten;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(m);
  const Eigen::VectorXd mu = ms.eigenvalues().cwiseMax(0.0);

  const double n_d = static_cast<double>(n);
  const double g_d = static_cast<double>(g);
  const double p_eff = static_cast<double>(rank);
  const double df_h = g_d - 1.0;

  if (config.statistic == ManovaStatistic::kWilks) {
    double lambda = 1.0;
    for (long i = 0; i < mu.size(); ++i) lambda /= 1.0 + mu(i);
    result.statistic = lambda;
    // Rao's F approximation (exact for p <= 2 or df_h <= 2).
    const double denom = p_eff * p_eff + df_h * df_h - 5.0;
    const double t =
        denom > 0.0 ? std::sqrt((p_eff * p_eff * df_h * df_h - 4.0) / denom) : 1.0;
    const double w = n_d - 1.0 - (p_eff + g_d) / 2.0;
    result.df1 = p_eff * df_h;
    result.df2 = w * t - (p_eff * df_h - 2.0) / 2.0;
    if (result.df2 <= 0.0) throw InputError("too few samples for the Wilks F approximation");
    const double lt = std::pow(lambda, 1.0 / t);
    result.f = (1.0 - lt) / lt * result.df2 / result.df1;
  } else {
    double v = 0.0;
    for (long i = 0; i < mu.size(); ++i) v += mu(i) / (1.0 + mu(i));
    result.statistic = v;
    const double s = std::min(p_eff, df_h);
    const double mm = (std::abs(p_eff - df_h) - 1.0) / 2.0;
    const double nn = (n_d - g_d - p_eff - 1.0) / 2.0;
    result.df1 = s * (2.0 * mm + s + 1.0);
    result.df2 = s * (2.0 * nn + s + 1.0);
    if (result.df2 <= 0.0 || v >= s)
      throw InputError("degenerate Pillai configuration");
    result.f = (2.0 * nn + s + 1.0) / (2.0 * mm + s + 1.0) * (v / s) / (1.0 - v / s);
  }
  result.p_value = 1.0 - f_cdf(result.f, result.df1, result.df2);
  result.p_value = std::clamp(result.p_value, 0.0, 1.0);

  // Univariate breakdown: one-way ANOVA per feature column.
  result.per_feature.resize(p);
  for (size_t j = 0; j < p; ++j) {
    const double ssb = h(static_cast<long>(j), static_cast<long>(j));
    const double ssw = e(static_cast<long>(j), static_cast<long>(j));
    FeatureTest& ft = result.per_feature[j];
    const double df1 = df_h;
    const double df2 = n_d - g_d;
    if (ssb <= tol) {
      // Between-group scatter at rounding-noise level: no effect.
      ft.f = 0.0;
      ft.p = 1.0;
      continue;
    }
    if (ssw <= tol) {
      // Real separation with no within-group variation at all.
      ft.f = std::numeric_limits<double>::infinity();
      ft.p = 0.0;
      continue;
    }
    ft.f = (ssb / df1) / (ssw / df2);
    ft.p = std::clamp(1.0 - f_cdf(ft.f, df1, df2), 0.0, 1.0);
  }
  return result;
}

}  // namespace shaperank::crosscat

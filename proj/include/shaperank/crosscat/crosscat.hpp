#pragma once

#include <string>
#include <vector>

namespace shaperank::crosscat {

// Spearman rank correlation with average ranks for ties.
// Throws InputError for lengths < 3, mismatched lengths, or constant input.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Per-category global feature importances in a shared feature order.
struct ImportanceMatrix {
  std::vector<std::string> categories;
  std::vector<std::string> features;
  std::vector<std::vector<double>> values;  // values[category][feature]
};

// Symmetric matrix of pairwise Spearman correlations between category rows,
// with an exact unit diagonal.
std::vector<std::vector<double>> importance_correlation_matrix(
    const ImportanceMatrix& imp);

struct Merge {
  int a = 0;  // cluster ids; leaves are 0..n-1, merge t creates id n+t
  int b = 0;
  double distance = 0.0;
  int size = 0;  // leaves under the new cluster
};

struct Dendrogram {
  std::vector<std::string> labels;
  std::vector<Merge> merges;  // n-1 entries, non-decreasing distance
};

// Agglomerative clustering with average linkage on the correlation distance
// 1 - Spearman rho between importance rows.
Dendrogram hierarchical_cluster(const ImportanceMatrix& imp);

enum class ManovaStatistic { kWilks, kPillai };

struct ManovaConfig {
  ManovaStatistic statistic = ManovaStatistic::kWilks;
};

struct FeatureTest {
  double f = 0.0;
  double p = 1.0;
};

struct ManovaResult {
  double statistic = 1.0;  // Wilks lambda or Pillai trace
  double f = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
  std::vector<FeatureTest> per_feature;  // one-way ANOVA per column
  bool used_pseudo_inverse = false;      // within-scatter was singular
  ManovaStatistic statistic_kind = ManovaStatistic::kWilks;
};

// One-way MANOVA across groups of multivariate samples, with a per-feature
// univariate ANOVA breakdown. Requires >= 2 groups, each larger than the
// feature count.
ManovaResult manova(const std::vector<std::vector<double>>& samples,
                    const std::vector<std::string>& groups,
                    const ManovaConfig& config = {});

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
// CDF of the F distribution with (df1, df2) degrees of freedom.
double f_cdf(double f, double df1, double df2);

}  // namespace shaperank::crosscat

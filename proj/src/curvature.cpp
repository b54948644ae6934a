#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <Eigen/Eigenvalues>

#include "shaperank/core/error.hpp"
#include "shaperank/core/parallel.hpp"
#include "shaperank/features/features.hpp"

namespace shaperank::feat {

namespace {

// Surface variation of the k nearest points to point i (the point itself
// counts as its own nearest neighbor). Ties in distance break by index so the
// neighbor set never depends on sort internals.
double point_surface_variation(const geom::PointCloud& cloud, int i, int k) {
  const int n = static_cast<int>(cloud.size());
  std::vector<std::pair<double, int>> dist(static_cast<size_t>(n));
  const Eigen::Vector3d& p = cloud.points[static_cast<size_t>(i)];
  for (int j = 0; j < n; ++j)
    dist[static_cast<size_t>(j)] = {(cloud.points[static_cast<size_t>(j)] - p).squaredNorm(), j};
  std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int j = 0; j < k; ++j) mean += cloud.points[static_cast<size_t>(dist[static_cast<size_t>(j)].second)];
  mean /= k;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int j = 0; j < k; ++j) {
    const Eigen::Vector3d d = cloud.points[static_cast<size_t>(dist[static_cast<size_t>(j)].second)] - mean;
    cov += d * d.transpose();
  }
  cov /= k;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d ev = solver.eigenvalues();  // ascending
  const double sum = ev[0] + ev[1] + ev[2];
  if (!(sum > 0.0)) return 0.0;
  return std::max(ev[0], 0.0) / sum;
}

std::vector<double> values_impl(const geom::PointCloud& cloud, int k, bool parallel) {
  const int n = static_cast<int>(cloud.size());
  if (n == 0) throw InputError("curvature: empty point cloud");
  if (k < 3) throw InputError("curvature: neighborhood must have at least 3 points");
  if (k > n)
    throw InputError("curvature: neighborhood size " + std::to_string(k) + " exceeds cloud size " +
                     std::to_string(n));
  std::vector<double> out(static_cast<size_t>(n));
  if (parallel && par::openmp_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = point_surface_variation(cloud, i, k);
#endif
  } else {
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = point_surface_variation(cloud, i, k);
  }
  return out;
}

}  // namespace

std::vector<double> curvature_values(const geom::PointCloud& cloud, int k) {
  return values_impl(cloud, k, true);
}

std::vector<double> curvature_values_serial(const geom::PointCloud& cloud, int k) {
  return values_impl(cloud, k, false);
}

CurvatureStats curvature_features(const geom::PointCloud& cloud, int k) {
  const std::vector<double> v = curvature_values(cloud, k);
  const double n = static_cast<double>(v.size());
  CurvatureStats stats;
  stats.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - stats.mean) * (x - stats.mean);
  stats.variance = ss / n;
  std::vector<double> sorted(v);
  std::sort(sorted.begin(), sorted.end());
  const size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return stats;
}

}  // namespace shaperank::feat

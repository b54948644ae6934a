#include "shaperank/geometry/obb.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "shaperank/core/error.hpp"

namespace shaperank::geom {

namespace {

// Replaces the basis of a degenerate eigen-subspace (columns first..last of
// `axes`) with the most world-aligned orthonormal basis of the same subspace.
// PCA directions are arbitrary inside such a subspace, so without this a cube
// or cylinder could pick up a random frame and report inflated extents.
void world_align_subspace(Eigen::Matrix3d& axes, int first, int last) {
  const int dim = last - first + 1;
  if (dim < 2) return;
  Eigen::Matrix3d basis = Eigen::Matrix3d::Zero();
  for (int i = 0; i < dim; ++i) basis.col(i) = axes.col(first + i);
  const Eigen::Matrix3d projector = basis.leftCols(dim) * basis.leftCols(dim).transpose();

  std::array<Eigen::Vector3d, 3> picked;
  int n_picked = 0;
  for (int w = 0; w < 3 && n_picked < dim; ++w) {
    Eigen::Vector3d v = projector * Eigen::Vector3d::Unit(w);
    for (int i = 0; i < n_picked; ++i) v -= picked[static_cast<size_t>(i)].dot(v) * picked[static_cast<size_t>(i)];
    const double len = v.norm();
    if (len < 1e-8) continue;
    picked[static_cast<size_t>(n_picked++)] = v / len;
  }
  if (n_picked < dim) return;  // subspace nearly orthogonal to some world axes, keep PCA basis
  for (int i = 0; i < dim; ++i) axes.col(first + i) = picked[static_cast<size_t>(i)];
}

}  // namespace

bool Obb::contains(const Eigen::Vector3d& p, double tol) const {
  const Eigen::Vector3d local = axes.transpose() * (p - center);
  for (int i = 0; i < 3; ++i)
    if (std::abs(local[i]) > 0.5 * extents[i] + tol) return false;
  return true;
}

int Obb::longest_axis() const {
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (extents[i] > extents[best]) best = i;
  return best;
}

Obb oriented_bounding_box(const std::vector<Eigen::Vector3d>& points) {
  if (points.empty()) throw InputError("oriented_bounding_box: no points");

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() == Eigen::Success && cov.norm() > 1e-300) {
    axes = solver.eigenvectors();
    const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
    const double scale = std::max(evals[2], 1e-300);
    // Fix arbitrary directions inside (near-)repeated eigenvalue groups.
    int group_start = 0;
    for (int i = 1; i <= 3; ++i) {
      if (i == 3 || std::abs(evals[i] - evals[group_start]) > 1e-6 * scale) {
        world_align_subspace(axes, group_start, i - 1);
        group_start = i;
      }
    }
  }

  // Assign principal directions to world slots by best |dot|, then fix signs.
  Eigen::Matrix3d mapped = Eigen::Matrix3d::Zero();
  std::array<bool, 3> world_used = {false, false, false};
  std::array<bool, 3> pca_used = {false, false, false};
  int last_world = 0;
  for (int pick = 0; pick < 3; ++pick) {
    int best_w = -1, best_p = -1;
    double best_dot = -1.0;
    for (int w = 0; w < 3; ++w) {
      if (world_used[static_cast<size_t>(w)]) continue;
      for (int p = 0; p < 3; ++p) {
        if (pca_used[static_cast<size_t>(p)]) continue;
        const double d = std::abs(axes.col(p)[w]);
        if (d > best_dot + 1e-12) {
          best_dot = d;
          best_w = w;
          best_p = p;
        }
      }
    }
    Eigen::Vector3d dir = axes.col(best_p);
    if (dir[best_w] < 0.0) dir = -dir;
    mapped.col(best_w) = dir;
    world_used[static_cast<size_t>(best_w)] = true;
    pca_used[static_cast<size_t>(best_p)] = true;
    last_world = best_w;
  }
  // Sign fixing can leave a reflection; flip the loosest assignment back.
  if (mapped.determinant() < 0.0) mapped.col(last_world) = -mapped.col(last_world);

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (const auto& p : points) {
    const Eigen::Vector3d local = mapped.transpose() * (p - mean);
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }

  Obb box;
  box.axes = mapped;
  box.extents = hi - lo;
  box.center = mean + mapped * (0.5 * (lo + hi));
  return box;
}

Obb oriented_bounding_box(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw InputError("oriented_bounding_box: empty mesh");
  return oriented_bounding_box(mesh.vertices);
}

Mesh obb_mesh(const Obb& box) {
  Mesh m;
  m.vertices.reserve(8);
  for (int i = 0; i < 8; ++i) {
    const Eigen::Vector3d corner(((i & 1) ? 0.5 : -0.5) * box.extents[0],
                                 ((i & 2) ? 0.5 : -0.5) * box.extents[1],
                                 ((i & 4) ? 0.5 : -0.5) * box.extents[2]);
    m.vertices.push_back(box.center + box.axes * corner);
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  repair_winding(m);
  recompute_vertex_normals(m);
  return m;
}

}  // namespace shaperank::geom

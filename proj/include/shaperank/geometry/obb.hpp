#pragma once

#include <vector>

#include <Eigen/Dense>

#include "shaperank/geometry/mesh.hpp"

namespace shaperank::geom {

// Box aligned to the principal axes of the vertex distribution.
//
// Axis convention: the three principal directions are assigned to world slots
// X/Y/Z greedily by largest |dot| with the world axes (ties broken by lower
// axis index), and signs chosen so each axis points along its world partner.
// extents[k] is then the full side length along the axis in slot k, so an
// axis-aligned 1x2x3 box reports extents (1,2,3) regardless of how PCA
// ordered its eigenvalues. Extents are not sorted.
//
// Eigenvalue ties (isotropic or cylindrical vertex spread) make principal
// directions arbitrary, so within each degenerate eigen-subspace the basis is
// re-picked to be as world-aligned as possible. A zero-variance direction
// falls out of the same rule and ends up on a world axis.
struct Obb {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();  // columns, unit length
  Eigen::Vector3d extents = Eigen::Vector3d::Zero();   // full side lengths

  bool contains(const Eigen::Vector3d& p, double tol) const;
  double diagonal() const { return extents.norm(); }
  // Slot (0..2) of the largest extent, ties to the lower slot.
  int longest_axis() const;
};

Obb oriented_bounding_box(const std::vector<Eigen::Vector3d>& points);
Obb oriented_bounding_box(const Mesh& mesh);

// Triangle mesh of the box faces, for debug dumps.
Mesh obb_mesh(const Obb& box);

}  // namespace shaperank::geom

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "shaperank/geometry/mesh.hpp"
#include "shaperank/geometry/point_cloud.hpp"

namespace shaperank::geom {

// Incremental convex hull. Returns a watertight, outward-oriented triangle
// mesh whose vertices are a subset of the input points. Throws InputError if
// the input has fewer than 4 points or is degenerate (collinear or coplanar).
Mesh convex_hull(const std::vector<Eigen::Vector3d>& points);
Mesh convex_hull(const PointCloud& cloud);

// Hull of the mesh's own vertices. The hull of a surface equals the hull of
// its vertex set, so this is what convexity and hollowness ratios use.
Mesh convex_hull_of_mesh(const Mesh& mesh);

}  // namespace shaperank::geom

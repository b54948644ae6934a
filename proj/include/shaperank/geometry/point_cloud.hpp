#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shaperank/geometry/mesh.hpp"

namespace shaperank::geom {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> source_face;  // face each point was drawn from, -1 for vertex mode

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Area-weighted uniform surface samples, reproducible from (mesh, n, seed).
PointCloud sample_point_cloud(const Mesh& mesh, int n, uint64_t seed);

// Mesh vertices taken verbatim as the cloud (no sampling, no seed).
PointCloud vertex_point_cloud(const Mesh& mesh);

}  // namespace shaperank::geom

#include "shaperank/geometry/point_cloud.hpp"

#include <algorithm>
#include <cmath>

#include "shaperank/core/error.hpp"
#include "shaperank/core/rng.hpp"

namespace shaperank::geom {

PointCloud sample_point_cloud(const Mesh& mesh, int n, uint64_t seed) {
  if (mesh.empty()) throw InputError("sample_point_cloud: empty mesh");
  if (n < 1) throw InputError("sample_point_cloud: n must be >= 1");

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    total += face_area(mesh, static_cast<int>(f));
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw InputError("sample_point_cloud: mesh has zero surface area");

  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(static_cast<size_t>(n));
  cloud.source_face.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const int f = std::min(static_cast<int>(it - cumulative.begin()),
                           static_cast<int>(mesh.faces.size()) - 1);
    const auto& [ia, ib, ic] = mesh.faces[static_cast<size_t>(f)];
    const Eigen::Vector3d& a = mesh.vertices[static_cast<size_t>(ia)];
    const Eigen::Vector3d& b = mesh.vertices[static_cast<size_t>(ib)];
    const Eigen::Vector3d& c = mesh.vertices[static_cast<size_t>(ic)];
    double r1 = rng.uniform01();
    double r2 = rng.uniform01();
    if (r1 + r2 > 1.0) {  // fold the unit square onto the triangle
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    cloud.points.push_back(a + r1 * (b - a) + r2 * (c - a));
    cloud.source_face.push_back(f);
  }
  return cloud;
}

PointCloud vertex_point_cloud(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw InputError("vertex_point_cloud: empty mesh");
  PointCloud cloud;
  cloud.points = mesh.vertices;
  cloud.source_face.assign(mesh.vertices.size(), -1);
  return cloud;
}

}  // namespace shaperank::geom

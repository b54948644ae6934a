#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "shaperank/core/error.hpp"
#include "shaperank/features/features.hpp"

namespace shaperank::feat {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Counts the maximal straight segments of the cross-section at axis.dot(x)=t.
// Each triangle straddling the plane contributes one chord; chords that meet
// end to end and continue in the same direction are merged, so a square
// section of a triangulated cube counts 4, not 8.
int section_segments(const geom::Mesh& mesh, const Eigen::Vector3d& axis, double t, double span) {
  const double nudge = 1e-12 * span;
  const double quantum = 1e-6 * span;

  std::vector<std::array<Eigen::Vector3d, 2>> chords;
  for (const auto& face : mesh.faces) {
    Eigen::Vector3d p[3];
    double d[3];
    for (int k = 0; k < 3; ++k) {
      p[k] = mesh.vertices[static_cast<size_t>(face[static_cast<size_t>(k)])];
      d[k] = axis.dot(p[k]) - t;
      if (std::abs(d[k]) < nudge) d[k] = nudge;  // keep vertices off the plane
    }
    std::array<Eigen::Vector3d, 2> ends;
    int n_ends = 0;
    for (int k = 0; k < 3 && n_ends < 2; ++k) {
      const int j = (k + 1) % 3;
      if ((d[k] > 0.0) == (d[j] > 0.0)) continue;
      const double w = d[k] / (d[k] - d[j]);
      ends[static_cast<size_t>(n_ends++)] = p[k] + w * (p[j] - p[k]);
    }
    if (n_ends == 2) chords.push_back(ends);
  }
  if (chords.empty()) return 0;

  // Snap endpoints onto a lattice so chords from neighboring triangles share
  // node ids despite rounding.
  std::map<std::array<long long, 3>, int> node_of;
  std::vector<Eigen::Vector3d> node_pos;
  auto node_id = [&](const Eigen::Vector3d& p) {
    const std::array<long long, 3> key = {static_cast<long long>(std::llround(p.x() / quantum)),
                                          static_cast<long long>(std::llround(p.y() / quantum)),
                                          static_cast<long long>(std::llround(p.z() / quantum))};
    const auto [it, inserted] = node_of.try_emplace(key, static_cast<int>(node_pos.size()));
    if (inserted) node_pos.push_back(p);
    return it->second;
  };

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& [a, b] : chords) {
    const int na = node_id(a), nb = node_id(b);
    if (na == nb) continue;
    edge_count[std::minmax(na, nb)] += 1;
  }
  // Coincident chords from duplicated geometry collapse to one edge.
  std::vector<std::pair<int, int>> edges;
  edges.reserve(edge_count.size());
  for (const auto& [e, cnt] : edge_count) edges.push_back(e);
  if (edges.empty()) return 0;

  std::vector<std::vector<int>> adjacent(node_pos.size());
  for (const auto& [a, b] : edges) {
    adjacent[static_cast<size_t>(a)].push_back(b);
    adjacent[static_cast<size_t>(b)].push_back(a);
  }

  // A node where exactly two edges meet and continue straight fuses them into
  // one segment; every such node reduces the segment count by one.
  int pass_through = 0;
  for (size_t n = 0; n < adjacent.size(); ++n) {
    if (adjacent[n].size() != 2) continue;
    const Eigen::Vector3d u = node_pos[static_cast<size_t>(adjacent[n][0])] - node_pos[n];
    const Eigen::Vector3d v = node_pos[static_cast<size_t>(adjacent[n][1])] - node_pos[n];
    const double uv = u.norm() * v.norm();
    if (uv <= 0.0) continue;
    if (u.cross(v).norm() <= 1e-9 * uv && u.dot(v) < 0.0) ++pass_through;
  }
  return std::max(static_cast<int>(edges.size()) - pass_through, 0);
}

double silhouette_along(const geom::Mesh& mesh, const Eigen::Vector3d& axis, int n_planes) {
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  for (const auto& v : mesh.vertices) {
    const double t = axis.dot(v);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  const double span = tmax - tmin;
  if (!(span > 0.0)) return 0.0;

  // Planes sit at cell centers of the middle 90% of the span, keeping clear
  // of end caps where sections degenerate to points.
  const double margin = 0.05 * span;
  const double inner = span - 2.0 * margin;
  long long total = 0;
  for (int i = 0; i < n_planes; ++i) {
    const double t = tmin + margin + inner * (i + 0.5) / n_planes;
    total += section_segments(mesh, axis, t, span);
  }
  return static_cast<double>(total);
}

Eigen::Vector3d slicing_axis(const geom::Mesh& mesh) {
  const geom::Obb box = geom::oriented_bounding_box(mesh);
  return box.axes.col(box.longest_axis());
}

}  // namespace

double silhouette_complexity(const geom::Mesh& mesh, int n_planes) {
  if (mesh.empty()) throw InputError("silhouette_complexity: empty mesh");
  if (n_planes < 1) throw InputError("silhouette_complexity: need at least 1 plane");
  return silhouette_along(mesh, slicing_axis(mesh), n_planes);
}

double multiview_silhouette_complexity(const geom::Mesh& mesh, int n_views, int n_planes) {
  if (mesh.empty()) throw InputError("multiview_silhouette_complexity: empty mesh");
  if (n_views < 1) throw InputError("multiview_silhouette_complexity: need at least 1 view");
  if (n_planes < 1) throw InputError("multiview_silhouette_complexity: need at least 1 plane");
  const Eigen::Vector3d axis = slicing_axis(mesh);
  double total = 0.0;
  for (int i = 0; i < n_views; ++i) {
    const geom::Mesh view = geom::rotated(mesh, geom::rotation_about_z(kPi * i / n_views));
    total += silhouette_along(view, axis, n_planes);
  }
  return total;
}

}  // namespace shaperank::feat

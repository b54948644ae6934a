#include "shaperank/geometry/convex_hull.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "shaperank/core/error.hpp"

namespace shaperank::geom {

namespace {

struct HullFace {
  std::array<int, 3> v;
  Eigen::Vector3d normal;  // unit outward
  double offset = 0.0;     // plane: normal . x = offset
  bool alive = true;
  std::vector<int> conflicts;  // input points strictly outside this face
};

double dist_to(const HullFace& f, const Eigen::Vector3d& p) {
  return f.normal.dot(p) - f.offset;
}

class IncrementalHull {
 public:
  explicit IncrementalHull(const std::vector<Eigen::Vector3d>& points) : pts_(points) {
    Eigen::Vector3d lo = pts_[0], hi = pts_[0];
    for (const auto& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    eps_ = 1e-9 * std::max((hi - lo).norm(), 1e-12);
  }

  Mesh build() {
    initial_simplex();
    assign_conflicts();
    for (;;) {
      int f = next_face_with_conflicts();
      if (f < 0) break;
      add_point(furthest_conflict(f));
    }
    return extract_mesh();
  }

 private:
  void initial_simplex() {
    const int n = static_cast<int>(pts_.size());
    // Widest pair among axis extremes, then the point farthest from their
    // line, then the point farthest from that plane.
    int i0 = 0, i1 = 0;
    {
      std::array<int, 6> extreme = {0, 0, 0, 0, 0, 0};
      for (int i = 1; i < n; ++i)
        for (int k = 0; k < 3; ++k) {
          if (pts_[static_cast<size_t>(i)][k] < pts_[static_cast<size_t>(extreme[static_cast<size_t>(2 * k)])][k])
            extreme[static_cast<size_t>(2 * k)] = i;
          if (pts_[static_cast<size_t>(i)][k] > pts_[static_cast<size_t>(extreme[static_cast<size_t>(2 * k + 1)])][k])
            extreme[static_cast<size_t>(2 * k + 1)] = i;
        }
      double best = -1.0;
      for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b) {
          const double d =
              (pts_[static_cast<size_t>(extreme[static_cast<size_t>(a)])] - pts_[static_cast<size_t>(extreme[static_cast<size_t>(b)])]).norm();
          if (d > best) {
            best = d;
            i0 = extreme[static_cast<size_t>(a)];
            i1 = extreme[static_cast<size_t>(b)];
          }
        }
      if (best <= eps_) throw InputError("convex_hull: all points coincide");
    }
    const Eigen::Vector3d dir = (pts_[static_cast<size_t>(i1)] - pts_[static_cast<size_t>(i0)]).normalized();
    int i2 = -1;
    {
      double best = eps_;
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d d = pts_[static_cast<size_t>(i)] - pts_[static_cast<size_t>(i0)];
        const double dist = (d - d.dot(dir) * dir).norm();
        if (dist > best) {
          best = dist;
          i2 = i;
        }
      }
      if (i2 < 0) throw InputError("convex_hull: degenerate input (collinear points)");
    }
    const Eigen::Vector3d plane_n =
        (pts_[static_cast<size_t>(i1)] - pts_[static_cast<size_t>(i0)]).cross(pts_[static_cast<size_t>(i2)] - pts_[static_cast<size_t>(i0)]).normalized();
    int i3 = -1;
    {
      double best = eps_;
      for (int i = 0; i < n; ++i) {
        const double dist = std::abs(plane_n.dot(pts_[static_cast<size_t>(i)] - pts_[static_cast<size_t>(i0)]));
        if (dist > best) {
          best = dist;
          i3 = i;
        }
      }
      if (i3 < 0) throw InputError("convex_hull: degenerate input (coplanar points)");
    }

    const Eigen::Vector3d centroid =
        0.25 * (pts_[static_cast<size_t>(i0)] + pts_[static_cast<size_t>(i1)] + pts_[static_cast<size_t>(i2)] + pts_[static_cast<size_t>(i3)]);
    make_face(i0, i1, i2, centroid);
    make_face(i0, i1, i3, centroid);
    make_face(i0, i2, i3, centroid);
    make_face(i1, i2, i3, centroid);
  }

  // Creates a face trusting the given winding to be outward.
  void make_face_directed(int a, int b, int c) {
    HullFace f;
    f.v = {a, b, c};
    Eigen::Vector3d normal =
        (pts_[static_cast<size_t>(b)] - pts_[static_cast<size_t>(a)]).cross(pts_[static_cast<size_t>(c)] - pts_[static_cast<size_t>(a)]);
    const double len = normal.norm();
    if (len > 0.0) normal /= len;
    f.normal = normal;
    f.offset = normal.dot(pts_[static_cast<size_t>(a)]);
    const int id = static_cast<int>(faces_.size());
    faces_.push_back(std::move(f));
    register_edges(id);
  }

  // Creates a face wound so its normal points away from `inside`.
  void make_face(int a, int b, int c, const Eigen::Vector3d& inside) {
    const Eigen::Vector3d normal =
        (pts_[static_cast<size_t>(b)] - pts_[static_cast<size_t>(a)]).cross(pts_[static_cast<size_t>(c)] - pts_[static_cast<size_t>(a)]);
    if (normal.dot(pts_[static_cast<size_t>(a)] - inside) < 0.0)
      make_face_directed(a, c, b);
    else
      make_face_directed(a, b, c);
  }

  void register_edges(int id) {
    const auto& v = faces_[static_cast<size_t>(id)].v;
    edge_face_[{v[0], v[1]}] = id;
    edge_face_[{v[1], v[2]}] = id;
    edge_face_[{v[2], v[0]}] = id;
  }

  void assign_conflicts() {
    for (int i = 0; i < static_cast<int>(pts_.size()); ++i) assign_point(i, 0);
  }

  // Attaches point i to the first face (scanning from `from`) that sees it.
  void assign_point(int i, int from) {
    for (int f = from; f < static_cast<int>(faces_.size()); ++f) {
      if (!faces_[static_cast<size_t>(f)].alive) continue;
      if (dist_to(faces_[static_cast<size_t>(f)], pts_[static_cast<size_t>(i)]) > eps_) {
        faces_[static_cast<size_t>(f)].conflicts.push_back(i);
        return;
      }
    }
  }

  int next_face_with_conflicts() const {
    for (int f = 0; f < static_cast<int>(faces_.size()); ++f)
      if (faces_[static_cast<size_t>(f)].alive && !faces_[static_cast<size_t>(f)].conflicts.empty()) return f;
    return -1;
  }

  int furthest_conflict(int f) const {
    const auto& face = faces_[static_cast<size_t>(f)];
    int best = face.conflicts[0];
    double best_dist = dist_to(face, pts_[static_cast<size_t>(best)]);
    for (int i : face.conflicts) {
      const double d = dist_to(face, pts_[static_cast<size_t>(i)]);
      if (d > best_dist) {
        best_dist = d;
        best = i;
      }
    }
    return best;
  }

  void add_point(int p) {
    // Collect every face that sees p, take its boundary as the horizon, and
    // replace the visible region with a fan from p to the horizon.
    std::vector<int> visible;
    std::vector<char> seen(faces_.size(), 0);
    for (int f = 0; f < static_cast<int>(faces_.size()); ++f) {
      if (faces_[static_cast<size_t>(f)].alive && dist_to(faces_[static_cast<size_t>(f)], pts_[static_cast<size_t>(p)]) > eps_) {
        visible.push_back(f);
        seen[static_cast<size_t>(f)] = 1;
      }
    }
    std::vector<std::pair<int, int>> horizon;
    std::vector<int> orphans;
    for (int f : visible) {
      const auto& v = faces_[static_cast<size_t>(f)].v;
      const std::array<std::pair<int, int>, 3> edges = {
          std::pair{v[0], v[1]}, std::pair{v[1], v[2]}, std::pair{v[2], v[0]}};
      for (const auto& [a, b] : edges) {
        const auto it = edge_face_.find({b, a});
        const int nb = it == edge_face_.end() ? -1 : it->second;
        if (nb < 0 || !seen[static_cast<size_t>(nb)]) horizon.emplace_back(a, b);
      }
      orphans.insert(orphans.end(), faces_[static_cast<size_t>(f)].conflicts.begin(),
                     faces_[static_cast<size_t>(f)].conflicts.end());
      faces_[static_cast<size_t>(f)].conflicts.clear();
    }
    for (int f : visible) {
      faces_[static_cast<size_t>(f)].alive = false;
      const auto& v = faces_[static_cast<size_t>(f)].v;
      edge_face_.erase({v[0], v[1]});
      edge_face_.erase({v[1], v[2]});
      edge_face_.erase({v[2], v[0]});
    }

    const int first_new = static_cast<int>(faces_.size());
    // Each horizon edge keeps the direction it had on its visible face, so a
    // fan face (a, b, p) is already wound outward and pairs up with the
    // surviving neighbor's (b, a).
    for (const auto& [a, b] : horizon) make_face_directed(a, b, p);

    std::sort(orphans.begin(), orphans.end());
    for (int i : orphans)
      if (i != p) assign_point(i, first_new);
  }

  Mesh extract_mesh() const {
    Mesh out;
    std::map<int, int> remap;
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      std::array<int, 3> tri;
      for (int k = 0; k < 3; ++k) {
        const auto [it, inserted] = remap.try_emplace(f.v[static_cast<size_t>(k)], static_cast<int>(out.vertices.size()));
        if (inserted) out.vertices.push_back(pts_[static_cast<size_t>(f.v[static_cast<size_t>(k)])]);
        tri[static_cast<size_t>(k)] = it->second;
      }
      out.faces.push_back(tri);
    }
    recompute_vertex_normals(out);
    return out;
  }

  const std::vector<Eigen::Vector3d>& pts_;
  double eps_;
  std::vector<HullFace> faces_;
  std::map<std::pair<int, int>, int> edge_face_;
};

}  // namespace

Mesh convex_hull(const std::vector<Eigen::Vector3d>& points) {
  if (points.size() < 4) throw InputError("convex_hull: need at least 4 points");
  return IncrementalHull(points).build();
}

Mesh convex_hull(const PointCloud& cloud) { return convex_hull(cloud.points); }

Mesh convex_hull_of_mesh(const Mesh& mesh) { return convex_hull(mesh.vertices); }

}  // namespace shaperank::geom

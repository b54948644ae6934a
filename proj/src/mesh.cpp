#include "shaperank/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <utility>

#include "shaperank/core/error.hpp"
#include "shaperank/geometry/obb.hpp"
#include "shaperank/geometry/voxel.hpp"

namespace shaperank::geom {

namespace {

Eigen::Vector3d cross_of(const Mesh& m, int f) {
  const auto& [a, b, c] = m.faces[static_cast<size_t>(f)];
  return (m.vertices[static_cast<size_t>(b)] - m.vertices[static_cast<size_t>(a)])
      .cross(m.vertices[static_cast<size_t>(c)] - m.vertices[static_cast<size_t>(a)]);
}

double bbox_diag(const Mesh& m) {
  if (m.vertices.empty()) return 0.0;
  Eigen::Vector3d lo = m.vertices[0], hi = m.vertices[0];
  for (const auto& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

// Undirected edge key.
uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint64_t>(static_cast<uint32_t>(b));
}

}  // namespace

Eigen::Vector3d face_normal(const Mesh& m, int f) {
  Eigen::Vector3d n = cross_of(m, f);
  double len = n.norm();
  if (len <= 0.0) return Eigen::Vector3d::Zero();
  return n / len;
}

double face_area(const Mesh& m, int f) { return 0.5 * cross_of(m, f).norm(); }

void recompute_vertex_normals(Mesh& m) {
  m.normals.assign(m.vertices.size(), Eigen::Vector3d::Zero());
  for (int f = 0; f < static_cast<int>(m.faces.size()); ++f) {
    const Eigen::Vector3d n = cross_of(m, f);  // length = 2 * area
    for (int v : m.faces[static_cast<size_t>(f)]) m.normals[static_cast<size_t>(v)] += n;
  }
  for (auto& n : m.normals) {
    double len = n.norm();
    n = len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::UnitZ();
  }
}

void clean_mesh(Mesh& m, double eps) {
  const int nv = static_cast<int>(m.vertices.size());
  const double diag2 = bbox_diag(m) * bbox_diag(m);
  const double area_tol = eps * std::max(diag2, 1e-300);
  std::vector<std::array<int, 3>> kept;
  kept.reserve(m.faces.size());
  for (size_t f = 0; f < m.faces.size(); ++f) {
    for (int v : m.faces[f]) {
      if (v < 0 || v >= nv)
        throw InputError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                         " out of range [0, " + std::to_string(nv) + ")");
    }
    const auto& [a, b, c] = m.faces[f];
    if (a == b || b == c || a == c) {
      ++m.degenerate_dropped;
      continue;
    }
    if (face_area(m, static_cast<int>(f)) <= area_tol) {
      ++m.degenerate_dropped;
      continue;
    }
    kept.push_back(m.faces[f]);
  }
  m.faces = std::move(kept);
}

double mesh_surface_area(const Mesh& m) {
  double area = 0.0;
  for (int f = 0; f < static_cast<int>(m.faces.size()); ++f) area += face_area(m, f);
  return area;
}

bool is_watertight(const Mesh& m) {
  std::map<uint64_t, int> count;
  for (const auto& [a, b, c] : m.faces) {
    ++count[edge_key(a, b)];
    ++count[edge_key(b, c)];
    ++count[edge_key(c, a)];
  }
  if (count.empty()) return false;
  for (const auto& [k, n] : count)
    if (n != 2) return false;
  return true;
}

bool is_consistently_oriented(const Mesh& m) {
  // Directed edge (a -> b) must never repeat, and for a closed mesh each
  // directed edge should have its reverse present.
  std::map<std::pair<int, int>, int> dir;
  for (const auto& [a, b, c] : m.faces) {
    if (++dir[{a, b}] > 1) return false;
    if (++dir[{b, c}] > 1) return false;
    if (++dir[{c, a}] > 1) return false;
  }
  for (const auto& [e, n] : dir) {
    auto rev = dir.find({e.second, e.first});
    if (rev == dir.end()) return false;
  }
  return true;
}

double signed_volume(const Mesh& m) {
  double vol = 0.0;
  for (const auto& [a, b, c] : m.faces) {
    const auto& pa = m.vertices[static_cast<size_t>(a)];
    const auto& pb = m.vertices[static_cast<size_t>(b)];
    const auto& pc = m.vertices[static_cast<size_t>(c)];
    vol += pa.dot(pb.cross(pc));
  }
  return vol / 6.0;
}

int repair_winding(Mesh& m) {
  const int nf = static_cast<int>(m.faces.size());
  std::map<uint64_t, std::vector<int>> incident;
  for (int f = 0; f < nf; ++f) {
    const auto& [a, b, c] = m.faces[static_cast<size_t>(f)];
    incident[edge_key(a, b)].push_back(f);
    incident[edge_key(b, c)].push_back(f);
    incident[edge_key(c, a)].push_back(f);
  }

  auto stores_directed = [&](int f, int u, int v) {
    const auto& [a, b, c] = m.faces[static_cast<size_t>(f)];
    return (a == u && b == v) || (b == u && c == v) || (c == u && a == v);
  };

  // Propagate a consistent orientation over each face-adjacency component.
  // flip[f] means face f must be reversed relative to its stored winding.
  std::vector<int> state(static_cast<size_t>(nf), 0);  // 0 unvisited, 1 keep, -1 flip
  std::vector<int> component(static_cast<size_t>(nf), -1);
  int n_components = 0;
  for (int root = 0; root < nf; ++root) {
    if (state[static_cast<size_t>(root)] != 0) continue;
    const int comp = n_components++;
    state[static_cast<size_t>(root)] = 1;
    component[static_cast<size_t>(root)] = comp;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int f = q.front();
      q.pop();
      const auto face = m.faces[static_cast<size_t>(f)];
      const bool f_flip = state[static_cast<size_t>(f)] < 0;
      std::array<std::pair<int, int>, 3> edges = {
          std::pair{face[0], face[1]}, std::pair{face[1], face[2]}, std::pair{face[2], face[0]}};
      for (auto [u, v] : edges) {
        if (f_flip) std::swap(u, v);  // (u, v) is f's direction after its pending flip
        for (int g : incident[edge_key(u, v)]) {
          if (g == f || state[static_cast<size_t>(g)] != 0) continue;
          // g is consistent with f when it traverses the shared edge the
          // opposite way, so it must flip exactly when it stores (u, v) too.
          state[static_cast<size_t>(g)] = stores_directed(g, u, v) ? -1 : 1;
          component[static_cast<size_t>(g)] = comp;
          q.push(g);
        }
      }
    }
  }

  // Orient each component outward: its faces, with pending flips applied,
  // should enclose nonnegative volume. Meaningful for closed components and
  // harmless for open ones.
  std::vector<double> comp_volume(static_cast<size_t>(n_components), 0.0);
  for (int f = 0; f < nf; ++f) {
    const auto& [a, b, c] = m.faces[static_cast<size_t>(f)];
    const auto& pa = m.vertices[static_cast<size_t>(a)];
    const auto& pb = m.vertices[static_cast<size_t>(b)];
    const auto& pc = m.vertices[static_cast<size_t>(c)];
    const double contrib = pa.dot(pb.cross(pc)) / 6.0 * state[static_cast<size_t>(f)];
    comp_volume[static_cast<size_t>(component[static_cast<size_t>(f)])] += contrib;
  }
  int flipped = 0;
  for (int f = 0; f < nf; ++f) {
    int s = state[static_cast<size_t>(f)];
    if (comp_volume[static_cast<size_t>(component[static_cast<size_t>(f)])] < 0.0) s = -s;
    if (s < 0) {
      std::swap(m.faces[static_cast<size_t>(f)][1], m.faces[static_cast<size_t>(f)][2]);
      ++flipped;
    }
  }
  return flipped;
}

VolumeEstimate mesh_volume(const Mesh& m, int fallback_resolution) {
  if (m.empty()) throw InputError("mesh_volume: empty mesh");
  if (is_watertight(m)) {
    if (is_consistently_oriented(m)) {
      return {std::abs(signed_volume(m)), false};
    }
    Mesh copy = m;
    repair_winding(copy);
    return {std::abs(signed_volume(copy)), false};
  }
  const VoxelGrid grid = voxelize(m, fallback_resolution);
  return {grid.volume_estimate(), true};
}

Eigen::Vector3d vertex_centroid(const Mesh& m) {
  if (m.vertices.empty()) throw InputError("vertex_centroid: empty mesh");
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& v : m.vertices) c += v;
  return c / static_cast<double>(m.vertices.size());
}

Mesh normalize(const Mesh& m, double category_scale) {
  if (m.empty()) throw InputError("normalize: empty mesh");
  if (!(category_scale > 0.0)) throw InputError("normalize: category_scale must be positive");
  Mesh out = m;
  const Eigen::Vector3d c = vertex_centroid(out);
  for (auto& v : out.vertices) v -= c;
  const Obb box = oriented_bounding_box(out);
  const double diag = box.extents.norm();
  if (!(diag > 1e-12)) throw InputError("normalize: degenerate mesh (zero extent)");
  const double s = category_scale / diag;
  for (auto& v : out.vertices) v *= s;
  repair_winding(out);
  recompute_vertex_normals(out);
  return out;
}

Mesh translated(const Mesh& m, const Eigen::Vector3d& t) {
  Mesh out = m;
  for (auto& v : out.vertices) v += t;
  return out;
}

Mesh scaled(const Mesh& m, double s) {
  Mesh out = m;
  for (auto& v : out.vertices) v *= s;
  return out;
}

Mesh rotated(const Mesh& m, const Eigen::Matrix3d& r) {
  Mesh out = m;
  for (auto& v : out.vertices) v = r * v;
  for (auto& n : out.normals) n = r * n;
  return out;
}

Eigen::Matrix3d rotation_about_z(double angle_rad) {
  Eigen::Matrix3d r;
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

void append_mesh(Mesh& dst, const Mesh& src) {
  const int base = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& [a, b, c] : src.faces)
    dst.faces.push_back({a + base, b + base, c + base});
  dst.normals.clear();
}

}  // namespace shaperank::geom

#include "shaperank/geometry/primitives.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "shaperank/core/error.hpp"

namespace shaperank::geom {

namespace {

constexpr double kPi = 3.14159265358979323846;

void finish(Mesh& m) {
  repair_winding(m);
  recompute_vertex_normals(m);
}

}  // namespace

Mesh make_box(double sx, double sy, double sz) {
  if (!(sx > 0.0 && sy > 0.0 && sz > 0.0)) throw InputError("make_box: sides must be positive");
  Mesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.emplace_back(((i & 1) ? 0.5 : -0.5) * sx, ((i & 2) ? 0.5 : -0.5) * sy,
                            ((i & 4) ? 0.5 : -0.5) * sz);
  m.faces = {{0, 2, 1}, {1, 2, 3},   // bottom (z = -sz/2)
             {4, 5, 6}, {5, 7, 6},   // top
             {0, 1, 4}, {1, 5, 4},   // front (y = -sy/2)
             {2, 6, 3}, {3, 6, 7},   // back
             {0, 4, 2}, {2, 4, 6},   // left (x = -sx/2)
             {1, 3, 5}, {3, 7, 5}};  // right
  finish(m);
  return m;
}

Mesh make_icosphere(double radius, int subdivisions) {
  if (!(radius > 0.0)) throw InputError("make_icosphere: radius must be positive");
  if (subdivisions < 0 || subdivisions > 7)
    throw InputError("make_icosphere: subdivisions must be in [0, 7]");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh m;
  const double verts[12][3] = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& v : verts)
    m.vertices.push_back(radius * Eigen::Vector3d(v[0], v[1], v[2]).normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto [it, inserted] = midpoint.try_emplace(key, static_cast<int>(m.vertices.size()));
      if (inserted) {
        const Eigen::Vector3d p =
            0.5 * (m.vertices[static_cast<size_t>(a)] + m.vertices[static_cast<size_t>(b)]);
        m.vertices.push_back(radius * p.normalized());
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& [a, b, c] : m.faces) {
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  finish(m);
  return m;
}

Mesh make_cylinder(double radius, double height, int segments) {
  if (!(radius > 0.0 && height > 0.0)) throw InputError("make_cylinder: size must be positive");
  if (segments < 3) throw InputError("make_cylinder: need at least 3 segments");
  Mesh m;
  const double hz = 0.5 * height;
  for (int ring = 0; ring < 2; ++ring) {
    const double z = ring ? hz : -hz;
    for (int i = 0; i < segments; ++i) {
      const double t = 2.0 * kPi * i / segments;
      m.vertices.emplace_back(radius * std::cos(t), radius * std::sin(t), z);
    }
  }
  const int bottom_center = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, -hz);
  const int top_center = bottom_center + 1;
  m.vertices.emplace_back(0.0, 0.0, hz);

  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    m.faces.push_back({i, j, segments + i});          // side
    m.faces.push_back({j, segments + j, segments + i});
    m.faces.push_back({bottom_center, j, i});         // bottom cap, facing -z
    m.faces.push_back({top_center, segments + i, segments + j});  // top cap
  }
  finish(m);
  return m;
}

Mesh make_torus(double major_radius, double minor_radius, int major_segments,
                int minor_segments) {
  if (!(major_radius > minor_radius && minor_radius > 0.0))
    throw InputError("make_torus: need major_radius > minor_radius > 0");
  if (major_segments < 3 || minor_segments < 3)
    throw InputError("make_torus: need at least 3 segments per ring");
  Mesh m;
  for (int i = 0; i < major_segments; ++i) {
    const double u = 2.0 * kPi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double v = 2.0 * kPi * j / minor_segments;
      const double ring = major_radius + minor_radius * std::cos(v);
      m.vertices.emplace_back(ring * std::cos(u), ring * std::sin(u),
                              minor_radius * std::sin(v));
    }
  }
  auto at = [&](int i, int j) {
    return ((i % major_segments) * minor_segments) + (j % minor_segments);
  };
  for (int i = 0; i < major_segments; ++i)
    for (int j = 0; j < minor_segments; ++j) {
      m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  finish(m);
  return m;
}

}  // namespace shaperank::geom

#include "shaperank/synth/generators.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "shaperank/core/error.hpp"
#include "shaperank/geometry/primitives.hpp"

namespace shaperank::synth {

using geom::Mesh;

const char* generator_name(Generator g) {
  switch (g) {
    case Generator::kBox: return "box";
    case Generator::kCylinder: return "cylinder";
    case Generator::kLathe: return "lathe";
    case Generator::kProngUnion: return "prong_union";
    case Generator::kCavityBox: return "cavity_box";
  }
  return "unknown";
}

Generator parse_generator(const std::string& name) {
  if (name == "box") return Generator::kBox;
  if (name == "cylinder") return Generator::kCylinder;
  if (name == "lathe") return Generator::kLathe;
  if (name == "prong_union") return Generator::kProngUnion;
  if (name == "cavity_box") return Generator::kCavityBox;
  throw InputError("unknown generator '" + name + "'");
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError("shape spec: " + message);
}

void finish(Mesh& mesh) {
  geom::repair_winding(mesh);
  geom::recompute_vertex_normals(mesh);
}

// Closed surface of revolution: profile radius(z) swept about Z, with
// triangle-fan caps at both ends.
Mesh make_lathe(const ShapeSpec& spec) {
  require(spec.radius > 0.0, "lathe radius must be positive");
  require(spec.height > 0.0, "lathe height must be positive");
  require(spec.segments >= 3, "lathe needs at least 3 segments");
  require(spec.rings >= 2, "lathe needs at least 2 rings");
  require(spec.wiggle >= 0.0 && spec.wiggle <= 0.9,
          "lathe wiggle must lie in [0, 0.9]");
  require(spec.wiggle_lobes >= 1, "lathe wiggle_lobes must be >= 1");

  const int n = spec.segments;
  const int rings = spec.rings;
  const double h = spec.height;
  Mesh mesh;

  auto profile = [&](double z) {
    const double phase = 2.0 * std::numbers::pi * spec.wiggle_lobes * (z / h);
    double r = spec.radius * (1.0 + spec.wiggle * std::sin(phase));
    return std::max(r, 0.05 * spec.radius);
  };

  // Ring vertices, bottom to top.
  for (int j = 0; j <= rings; ++j) {
    const double z = -0.5 * h + h * static_cast<double>(j) / rings;
    const double r = profile(z);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      mesh.vertices.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
  }
  const int bottom_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, -0.5 * h);
  const int top_center = bottom_center + 1;
  mesh.vertices.emplace_back(0.0, 0.0, 0.5 * h);

  auto ring_vertex = [&](int ring, int i) { return ring * n + (i % n); };

  for (int j = 0; j < rings; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = ring_vertex(j, i);
      const int b = ring_vertex(j, i + 1);
      const int c = ring_vertex(j + 1, i + 1);
      const int d = ring_vertex(j + 1, i);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  }
  for (int i = 0; i < n; ++i) {
    mesh.faces.push_back({bottom_center, ring_vertex(0, i + 1), ring_vertex(0, i)});
    mesh.faces.push_back({top_center, ring_vertex(rings, i), ring_vertex(rings, i + 1)});
  }
  finish(mesh);
  return mesh;
}

Mesh make_prong_union(const ShapeSpec& spec) {
  require(spec.prongs >= 1 && spec.prongs <= 16,
          "prong count must lie in [1, 16]");
  require(spec.prong_length > 0.0, "prong length must be positive");

  const double length = spec.prong_length;
  // Width ~3 voxel cells at the default 64^3 resolution so each prong thins
  // to a one-pixel spine per slice.
  const double width = 0.05 * length;
  const double spacing = 3.5 * width;

  Mesh mesh;
  for (int i = 0; i < spec.prongs; ++i) {
    Mesh prong = geom::make_box(width, width, length);
    const double x = (i - 0.5 * (spec.prongs - 1)) * spacing;
    geom::append_mesh(mesh, geom::translated(prong, {x, 0.0, 0.0}));
  }
  finish(mesh);
  return mesh;
}

// Unit outer cube with a square cavity of side f and depth f opening through
// the center of the top face.
Mesh make_cavity_box(const ShapeSpec& spec) {
  const double f = spec.cavity_fraction;
  require(f >= 0.05 && f <= 0.9, "cavity_fraction must lie in [0.05, 0.9]");

  const double o = 0.5;       // outer half-side
  const double c = 0.5 * f;   // cavity half-side
  const double floor_z = o - f;

  Mesh mesh;
  auto add = [&](double x, double y, double z) {
    mesh.vertices.emplace_back(x, y, z);
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  auto quad = [&](int a, int b, int cc, int d) {
    mesh.faces.push_back({a, b, cc});
    mesh.faces.push_back({a, cc, d});
  };

  // Outer corners: bottom ring then top ring, counter-clockwise from (-,-).
  const int ob0 = add(-o, -o, -o), ob1 = add(o, -o, -o);
  const int ob2 = add(o, o, -o), ob3 = add(-o, o, -o);
  const int ot0 = add(-o, -o, o), ot1 = add(o, -o, o);
  const int ot2 = add(o, o, o), ot3 = add(-o, o, o);
  // Cavity rim on the top face and cavity floor corners.
  const int rt0 = add(-c, -c, o), rt1 = add(c, -c, o);
  const int rt2 = add(c, c, o), rt3 = add(-c, c, o);
  const int rb0 = add(-c, -c, floor_z), rb1 = add(c, -c, floor_z);
  const int rb2 = add(c, c, floor_z), rb3 = add(-c, c, floor_z);

  quad(ob0, ob3, ob2, ob1);                       // bottom
  quad(ob0, ob1, ot1, ot0);                       // outer walls
  quad(ob1, ob2, ot2, ot1);
  quad(ob2, ob3, ot3, ot2);
  quad(ob3, ob0, ot0, ot3);
  quad(ot0, ot1, rt1, rt0);                       // top annulus
  quad(ot1, ot2, rt2, rt1);
  quad(ot2, ot3, rt3, rt2);
  quad(ot3, ot0, rt0, rt3);
  quad(rt0, rt1, rb1, rb0);                       // cavity walls
  quad(rt1, rt2, rb2, rb1);
  quad(rt2, rt3, rb3, rb2);
  quad(rt3, rt0, rb0, rb3);
  quad(rb0, rb1, rb2, rb3);                       // cavity floor
  finish(mesh);
  return mesh;
}

}  // namespace

Mesh generate_shape(const ShapeSpec& spec) {
  switch (spec.kind) {
    case Generator::kBox:
      require(spec.size_x > 0.0 && spec.size_y > 0.0 && spec.size_z > 0.0,
              "box sides must be positive");
      return geom::make_box(spec.size_x, spec.size_y, spec.size_z);
    case Generator::kCylinder:
      require(spec.radius > 0.0, "cylinder radius must be positive");
      require(spec.height > 0.0, "cylinder height must be positive");
      require(spec.segments >= 3, "cylinder needs at least 3 segments");
      return geom::make_cylinder(spec.radius, spec.height, spec.segments);
    case Generator::kLathe:
      return make_lathe(spec);
    case Generator::kProngUnion:
      return make_prong_union(spec);
    case Generator::kCavityBox:
      return make_cavity_box(spec);
  }
  throw InputError("shape spec: unknown generator kind");
}

}  // namespace shaperank::synth

#pragma once

#include "shaperank/geometry/mesh.hpp"

namespace shaperank::geom {

// All primitives are centered at the origin, watertight, and outward wound.

Mesh make_box(double sx, double sy, double sz);

// Subdivided icosahedron with vertices projected to the sphere. Subdivision 0
// is the raw icosahedron (12 vertices, 20 faces); each level quadruples faces.
Mesh make_icosphere(double radius, int subdivisions);

// Capped prism around the Z axis with a regular n-gon cross-section.
Mesh make_cylinder(double radius, double height, int segments);

// Ring around the Z axis; tube centerline radius R, tube radius r.
Mesh make_torus(double major_radius, double minor_radius, int major_segments,
                int minor_segments);

}  // namespace shaperank::geom

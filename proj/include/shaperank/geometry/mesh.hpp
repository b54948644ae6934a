#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace shaperank::geom {

// Triangle surface mesh. Vertices in model units; faces index into vertices;
// normals are per-vertex and only valid after recompute_vertex_normals.
struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Eigen::Vector3d> normals;
  // Zero-area faces removed by the loader / cleanup pass.
  int degenerate_dropped = 0;

  bool empty() const { return vertices.empty() || faces.empty(); }
};

Eigen::Vector3d face_normal(const Mesh& m, int f);  // unit, zero for degenerate
double face_area(const Mesh& m, int f);

// Area-weighted average of incident face normals, normalized per vertex.
void recompute_vertex_normals(Mesh& m);

// Drops zero-area faces (area <= eps * bbox_diag^2), counting them in
// degenerate_dropped. Throws InputError on out-of-range face indices.
void clean_mesh(Mesh& m, double eps = 1e-12);

double mesh_surface_area(const Mesh& m);

// Every undirected edge is shared by exactly two faces.
bool is_watertight(const Mesh& m);

// Every undirected edge is traversed once in each direction.
bool is_consistently_oriented(const Mesh& m);

// Makes face windings consistent by spanning-tree propagation across shared
// edges, then flips all faces if the total signed volume came out negative.
// Returns the number of faces flipped.
int repair_winding(Mesh& m);

// Divergence-theorem sum of signed tetrahedra against the origin.
// Meaningful only for consistently oriented closed meshes.
double signed_volume(const Mesh& m);

struct VolumeEstimate {
  double value = 0.0;
  // True when the mesh was not watertight and the value comes from voxel
  // occupancy rather than the divergence theorem.
  bool voxel_fallback = false;
};

// Volume of the enclosed solid. Watertight meshes use the divergence theorem
// (after winding repair on a copy if needed); open meshes fall back to a
// voxel-occupancy estimate at `fallback_resolution`.
VolumeEstimate mesh_volume(const Mesh& m, int fallback_resolution = 64);

Eigen::Vector3d vertex_centroid(const Mesh& m);

// Translates the vertex centroid to the origin and uniformly scales so the
// PCA oriented-bounding-box diagonal equals `category_scale`, then repairs
// winding and recomputes normals. Idempotent. Throws InputError on
// degenerate (zero-extent) input.
Mesh normalize(const Mesh& m, double category_scale);

Mesh translated(const Mesh& m, const Eigen::Vector3d& t);
Mesh scaled(const Mesh& m, double s);
Mesh rotated(const Mesh& m, const Eigen::Matrix3d& r);
Eigen::Matrix3d rotation_about_z(double angle_rad);

// Appends another mesh as a disjoint component.
void append_mesh(Mesh& dst, const Mesh& src);

}  // namespace shaperank::geom

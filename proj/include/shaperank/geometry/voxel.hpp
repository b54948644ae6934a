#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shaperank/geometry/mesh.hpp"

namespace shaperank::geom {

constexpr uint8_t kVoxEmpty = 0;
constexpr uint8_t kVoxSurface = 1;
constexpr uint8_t kVoxInterior = 2;

// Cubic occupancy grid over a mesh. Cells are cubes of edge `cell`; the grid
// is centered on the mesh AABB center and sized so the longest mesh extent
// spans resolution-2 cells, leaving at least one cell of margin on every side
// for the outside flood fill.
struct VoxelGrid {
  int resolution = 0;
  double cell = 0.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();  // min corner of cell (0,0,0)
  std::vector<uint8_t> occ;                          // x fastest, then y, then z
  bool surface_only = false;  // mesh was open, interior fill skipped

  size_t index(int x, int y, int z) const {
    return (static_cast<size_t>(z) * resolution + y) * resolution + x;
  }
  uint8_t at(int x, int y, int z) const { return occ[index(x, y, z)]; }
  bool occupied(int x, int y, int z) const { return at(x, y, z) != kVoxEmpty; }
  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < resolution && y < resolution && z < resolution;
  }
  Eigen::Vector3d cell_center(int x, int y, int z) const {
    return origin + cell * Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5);
  }

  long long count(uint8_t code) const;
  long long occupied_count() const;
  // Midpoint rule: interior cells count fully, surface cells half.
  double volume_estimate() const;
};

// Surface rasterization by triangle-box overlap tests, then interior fill for
// watertight meshes (outside flood from the grid boundary, interior is the
// unreached remainder). Open meshes get surface occupancy only, flagged.
VoxelGrid voxelize(const Mesh& mesh, int resolution = 64);
// Single-threaded reference; output is bit-identical to voxelize().
VoxelGrid voxelize_serial(const Mesh& mesh, int resolution = 64);

// Separating-axis overlap test between a triangle and an axis-aligned box.
// Touching counts as overlap, which can only thicken the rasterized shell.
bool triangle_box_overlap(const Eigen::Vector3d& box_center, const Eigen::Vector3d& box_half,
                          const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                          const Eigen::Vector3d& c);

// Cell centers of occupied voxels, for debug dumps.
std::vector<Eigen::Vector3d> occupied_centers(const VoxelGrid& grid);

}  // namespace shaperank::geom

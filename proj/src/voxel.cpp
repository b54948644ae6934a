#include "shaperank/geometry/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "shaperank/core/error.hpp"
#include "shaperank/core/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shaperank::geom {

long long VoxelGrid::count(uint8_t code) const {
  long long n = 0;
  for (uint8_t v : occ) n += (v == code);
  return n;
}

long long VoxelGrid::occupied_count() const {
  long long n = 0;
  for (uint8_t v : occ) n += (v != kVoxEmpty);
  return n;
}

double VoxelGrid::volume_estimate() const {
  const double cells =
      static_cast<double>(count(kVoxInterior)) + 0.5 * static_cast<double>(count(kVoxSurface));
  return cells * cell * cell * cell;
}

namespace {

// A separating axis rejects only when the projections are strictly apart by
// more than a small relative slack, so rounding cannot open pinholes in the
// rasterized shell.
bool separated_on(const Eigen::Vector3d& axis, const Eigen::Vector3d& v0,
                  const Eigen::Vector3d& v1, const Eigen::Vector3d& v2,
                  const Eigen::Vector3d& half) {
  const double p0 = v0.dot(axis), p1 = v1.dot(axis), p2 = v2.dot(axis);
  const double mn = std::min({p0, p1, p2});
  const double mx = std::max({p0, p1, p2});
  const double r = (half[0] * std::abs(axis[0]) + half[1] * std::abs(axis[1]) +
                    half[2] * std::abs(axis[2])) *
                       (1.0 + 1e-10) +
                   1e-300;
  return mn > r || mx < -r;
}

}  // namespace

bool triangle_box_overlap(const Eigen::Vector3d& box_center, const Eigen::Vector3d& box_half,
                          const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                          const Eigen::Vector3d& c) {
  const Eigen::Vector3d v0 = a - box_center;
  const Eigen::Vector3d v1 = b - box_center;
  const Eigen::Vector3d v2 = c - box_center;
  const Eigen::Vector3d e0 = v1 - v0;
  const Eigen::Vector3d e1 = v2 - v1;
  const Eigen::Vector3d e2 = v0 - v2;

  for (int k = 0; k < 3; ++k)
    if (separated_on(Eigen::Vector3d::Unit(k), v0, v1, v2, box_half)) return false;
  if (separated_on(e0.cross(e1), v0, v1, v2, box_half)) return false;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d u = Eigen::Vector3d::Unit(k);
    if (separated_on(u.cross(e0), v0, v1, v2, box_half)) return false;
    if (separated_on(u.cross(e1), v0, v1, v2, box_half)) return false;
    if (separated_on(u.cross(e2), v0, v1, v2, box_half)) return false;
  }
  return true;
}

namespace {

VoxelGrid empty_grid(const Mesh& mesh, int resolution) {
  if (resolution < 8) throw InputError("voxelize: resolution must be >= 8");
  if (mesh.empty()) throw InputError("voxelize: empty mesh");
  Eigen::Vector3d lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double max_extent = (hi - lo).maxCoeff();
  if (!(max_extent > 0.0)) throw InputError("voxelize: degenerate mesh (zero extent)");

  VoxelGrid grid;
  grid.resolution = resolution;
  grid.cell = max_extent / (resolution - 2);
  grid.origin = 0.5 * (lo + hi) - (0.5 * resolution * grid.cell) * Eigen::Vector3d::Ones();
  grid.occ.assign(static_cast<size_t>(resolution) * resolution * resolution, kVoxEmpty);
  return grid;
}

void rasterize_face(const Mesh& mesh, const VoxelGrid& grid, int f, std::vector<uint8_t>& occ) {
  const int res = grid.resolution;
  const auto& [ia, ib, ic] = mesh.faces[static_cast<size_t>(f)];
  const Eigen::Vector3d& a = mesh.vertices[static_cast<size_t>(ia)];
  const Eigen::Vector3d& b = mesh.vertices[static_cast<size_t>(ib)];
  const Eigen::Vector3d& c = mesh.vertices[static_cast<size_t>(ic)];
  const Eigen::Vector3d half = Eigen::Vector3d::Constant(0.5 * grid.cell);

  const Eigen::Vector3d tlo = a.cwiseMin(b).cwiseMin(c);
  const Eigen::Vector3d thi = a.cwiseMax(b).cwiseMax(c);
  int cl[3], ch[3];
  for (int k = 0; k < 3; ++k) {
    // One extra cell each way so exact boundary touches are still tested.
    cl[k] = std::max(0, static_cast<int>(std::floor((tlo[k] - grid.origin[k]) / grid.cell)) - 1);
    ch[k] = std::min(res - 1,
                     static_cast<int>(std::floor((thi[k] - grid.origin[k]) / grid.cell)) + 1);
  }
  for (int z = cl[2]; z <= ch[2]; ++z)
    for (int y = cl[1]; y <= ch[1]; ++y)
      for (int x = cl[0]; x <= ch[0]; ++x) {
        const size_t idx = grid.index(x, y, z);
        if (occ[idx] != kVoxEmpty) continue;
        if (triangle_box_overlap(grid.cell_center(x, y, z), half, a, b, c))
          occ[idx] = kVoxSurface;
      }
}

void fill_interior(VoxelGrid& grid) {
  const int res = grid.resolution;
  std::vector<uint8_t> outside(grid.occ.size(), 0);
  std::queue<std::array<int, 3>> queue;
  auto seed = [&](int x, int y, int z) {
    const size_t idx = grid.index(x, y, z);
    if (grid.occ[idx] == kVoxEmpty && !outside[idx]) {
      outside[idx] = 1;
      queue.push({x, y, z});
    }
  };
  for (int a = 0; a < res; ++a)
    for (int b = 0; b < res; ++b) {
      seed(a, b, 0);
      seed(a, b, res - 1);
      seed(a, 0, b);
      seed(a, res - 1, b);
      seed(0, a, b);
      seed(res - 1, a, b);
    }
  static constexpr int kStep[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
  while (!queue.empty()) {
    const auto [x, y, z] = queue.front();
    queue.pop();
    for (const auto& s : kStep) {
      const int nx = x + s[0], ny = y + s[1], nz = z + s[2];
      if (grid.in_bounds(nx, ny, nz)) seed(nx, ny, nz);
    }
  }
  for (size_t i = 0; i < grid.occ.size(); ++i)
    if (grid.occ[i] == kVoxEmpty && !outside[i]) grid.occ[i] = kVoxInterior;
}

VoxelGrid voxelize_impl(const Mesh& mesh, int resolution, bool parallel) {
  VoxelGrid grid = empty_grid(mesh, resolution);
  const int nf = static_cast<int>(mesh.faces.size());

  if (parallel && par::openmp_enabled()) {
#ifdef _OPENMP
#pragma omp parallel
    {
      std::vector<uint8_t> local(grid.occ.size(), kVoxEmpty);
#pragma omp for schedule(static)
      for (int f = 0; f < nf; ++f) rasterize_face(mesh, grid, f, local);
#pragma omp critical
      {
        // Marking is a set union, so the merge order cannot matter.
        for (size_t i = 0; i < local.size(); ++i)
          if (local[i] != kVoxEmpty) grid.occ[i] = local[i];
      }
    }
#endif
  } else {
    for (int f = 0; f < nf; ++f) rasterize_face(mesh, grid, f, grid.occ);
  }

  if (is_watertight(mesh)) {
    fill_interior(grid);
  } else {
    grid.surface_only = true;
  }
  return grid;
}

}  // namespace

VoxelGrid voxelize(const Mesh& mesh, int resolution) {
  return voxelize_impl(mesh, resolution, true);
}

VoxelGrid voxelize_serial(const Mesh& mesh, int resolution) {
  return voxelize_impl(mesh, resolution, false);
}

std::vector<Eigen::Vector3d> occupied_centers(const VoxelGrid& grid) {
  std::vector<Eigen::Vector3d> out;
  for (int z = 0; z < grid.resolution; ++z)
    for (int y = 0; y < grid.resolution; ++y)
      for (int x = 0; x < grid.resolution; ++x)
        if (grid.occupied(x, y, z)) out.push_back(grid.cell_center(x, y, z));
  return out;
}

}  // namespace shaperank::geom

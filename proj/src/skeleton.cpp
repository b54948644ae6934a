#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "shaperank/core/error.hpp"
#include "shaperank/features/features.hpp"

namespace shaperank::feat {

namespace {

// 2D thinning of one z-slice. Pixels are addressed (x, y); the neighbor ring
// runs N, NE, E, SE, S, SW, W, NW. Both subiterations mark first and delete
// together, the textbook simultaneous formulation.
class SliceThinner {
 public:
  SliceThinner(int res) : res_(res), img_(static_cast<size_t>(res) * res, 0) {}

  uint8_t& at(int x, int y) { return img_[static_cast<size_t>(y) * res_ + x]; }
  uint8_t get(int x, int y) const {
    if (x < 0 || y < 0 || x >= res_ || y >= res_) return 0;
    return img_[static_cast<size_t>(y) * res_ + x];
  }

  // Returns the number of full iterations taken; throws past the cap.
  int thin(int max_iterations) {
    for (int iter = 1; iter <= max_iterations; ++iter) {
      const int removed = subiteration(0) + subiteration(1);
      if (removed == 0) return iter;
    }
    throw ConvergenceError("thinning did not reach a fixpoint", 0.0, max_iterations, {});
  }

 private:
  int subiteration(int phase) {
    std::vector<std::pair<int, int>> doomed;
    for (int y = 0; y < res_; ++y)
      for (int x = 0; x < res_; ++x) {
        if (!get(x, y)) continue;
        const std::array<uint8_t, 8> p = {get(x, y - 1), get(x + 1, y - 1), get(x + 1, y),
                                          get(x + 1, y + 1), get(x, y + 1), get(x - 1, y + 1),
                                          get(x - 1, y), get(x - 1, y - 1)};
        int b = 0;
        for (uint8_t v : p) b += v;
        if (b < 2 || b > 6) continue;
        int a = 0;
        for (int k = 0; k < 8; ++k)
          if (!p[static_cast<size_t>(k)] && p[static_cast<size_t>((k + 1) % 8)]) ++a;
        if (a != 1) continue;
        // Ring entries: p[0]=N(P2) p[2]=E(P4) p[4]=S(P6) p[6]=W(P8).
        const bool ok = phase == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                   : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
        if (ok) doomed.emplace_back(x, y);
      }
    for (const auto& [x, y] : doomed) at(x, y) = 0;
    return static_cast<int>(doomed.size());
  }

  int res_;
  std::vector<uint8_t> img_;
};

std::vector<uint8_t> thin_slicewise(const geom::VoxelGrid& grid) {
  const int res = grid.resolution;
  std::vector<uint8_t> out(grid.occ.size(), 0);
  for (int z = 0; z < res; ++z) {
    SliceThinner slice(res);
    bool any = false;
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x)
        if (grid.occupied(x, y, z)) {
          slice.at(x, y) = 1;
          any = true;
        }
    if (!any) continue;
    slice.thin(200);
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x)
        if (slice.get(x, y)) out[grid.index(x, y, z)] = 1;
  }
  return out;
}

// Volumetric thinning: directional border peeling that only deletes simple
// voxels (removal keeps both object and background connectivity locally) and
// never deletes curve endpoints. Deletion is sequential in scan order with
// re-checking, which is slower than parallel marking but cannot break
// connectivity.
class VolumeThinner {
 public:
  explicit VolumeThinner(const geom::VoxelGrid& grid)
      : res_(grid.resolution), occ_(grid.occ.size(), 0) {
    for (size_t i = 0; i < grid.occ.size(); ++i) occ_[i] = grid.occ[i] != geom::kVoxEmpty;
  }

  std::vector<uint8_t> thin(int max_iterations) {
    static constexpr int kDir[6][3] = {{0, 0, 1},  {0, 0, -1}, {0, 1, 0},
                                       {0, -1, 0}, {1, 0, 0},  {-1, 0, 0}};
    for (int iter = 1; iter <= max_iterations; ++iter) {
      int removed = 0;
      for (const auto& d : kDir) removed += peel(d[0], d[1], d[2]);
      if (removed == 0) return occ_;
    }
    throw ConvergenceError("3d thinning did not reach a fixpoint", 0.0, max_iterations, {});
  }

 private:
  bool get(int x, int y, int z) const {
    if (x < 0 || y < 0 || z < 0 || x >= res_ || y >= res_ || z >= res_) return false;
    return occ_[(static_cast<size_t>(z) * res_ + y) * res_ + x] != 0;
  }
  void clear(int x, int y, int z) { occ_[(static_cast<size_t>(z) * res_ + y) * res_ + x] = 0; }

  int object_neighbors(int x, int y, int z) const {
    int n = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy && !dz) continue;
          n += get(x + dx, y + dy, z + dz);
        }
    return n;
  }

  // Object neighbors in the 26-neighborhood must stay 26-connected to each
  // other after removing the center.
  bool object_connected_without(int x, int y, int z) const {
    bool obj[3][3][3] = {};
    int count = 0;
    int sx = -1, sy = -1, sz = -1;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy && !dz) continue;
          if (get(x + dx, y + dy, z + dz)) {
            obj[dx + 1][dy + 1][dz + 1] = true;
            ++count;
            sx = dx + 1;
            sy = dy + 1;
            sz = dz + 1;
          }
        }
    if (count == 0) return false;
    bool seen[3][3][3] = {};
    std::vector<std::array<int, 3>> stack = {{sx, sy, sz}};
    seen[sx][sy][sz] = true;
    int reached = 1;
    while (!stack.empty()) {
      const auto [cx, cy, cz] = stack.back();
      stack.pop_back();
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy, nz = cz + dz;
            if (nx < 0 || ny < 0 || nz < 0 || nx > 2 || ny > 2 || nz > 2) continue;
            if (nx == 1 && ny == 1 && nz == 1) continue;  // center excluded
            if (!obj[nx][ny][nz] || seen[nx][ny][nz]) continue;
            seen[nx][ny][nz] = true;
            ++reached;
            stack.push_back({nx, ny, nz});
          }
    }
    return reached == count;
  }

  // Background 6-neighbors of the center must stay 6-connected through the
  // background of the 18-neighborhood.
  bool background_connected(int x, int y, int z) const {
    static constexpr int kFace[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                        {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    std::vector<std::array<int, 3>> bg_faces;
    for (const auto& d : kFace)
      if (!get(x + d[0], y + d[1], z + d[2])) bg_faces.push_back({d[0] + 1, d[1] + 1, d[2] + 1});
    if (bg_faces.empty()) return false;  // interior voxel, not removable
    if (bg_faces.size() == 1) return true;

    // Flood over background cells of the 18-neighborhood (offsets with at
    // most two nonzero coordinates), 6-connectivity, center excluded.
    auto in18 = [](int ax, int ay, int az) {
      return std::abs(ax - 1) + std::abs(ay - 1) + std::abs(az - 1) <= 2 &&
             !(ax == 1 && ay == 1 && az == 1);
    };
    bool bg[3][3][3] = {};
    for (int az = 0; az < 3; ++az)
      for (int ay = 0; ay < 3; ++ay)
        for (int ax = 0; ax < 3; ++ax)
          if (in18(ax, ay, az) && !get(x + ax - 1, y + ay - 1, z + az - 1)) bg[ax][ay][az] = true;
    bool seen[3][3][3] = {};
    std::vector<std::array<int, 3>> stack = {bg_faces[0]};
    seen[bg_faces[0][0]][bg_faces[0][1]][bg_faces[0][2]] = true;
    while (!stack.empty()) {
      const auto [cx, cy, cz] = stack.back();
      stack.pop_back();
      for (const auto& d : kFace) {
        const int nx = cx + d[0], ny = cy + d[1], nz = cz + d[2];
        if (nx < 0 || ny < 0 || nz < 0 || nx > 2 || ny > 2 || nz > 2) continue;
        if (!bg[nx][ny][nz] || seen[nx][ny][nz]) continue;
        seen[nx][ny][nz] = true;
        stack.push_back({nx, ny, nz});
      }
    }
    for (const auto& f : bg_faces)
      if (!seen[f[0]][f[1]][f[2]]) return false;
    return true;
  }

  int peel(int dx, int dy, int dz) {
    // Candidates are frozen up front and must be exposed on the peel side
    // while still backed by an object voxel on the opposite side. The first
    // clause keeps a deletion from exposing its neighbor within the same
    // pass; the second keeps the peel strictly directional, so structures
    // already one voxel thick along this axis can never erode lengthwise.
    std::vector<std::array<int, 3>> border;
    for (int z = 0; z < res_; ++z)
      for (int y = 0; y < res_; ++y)
        for (int x = 0; x < res_; ++x)
          if (get(x, y, z) && !get(x + dx, y + dy, z + dz) &&
              get(x - dx, y - dy, z - dz))
            border.push_back({x, y, z});
    // Delete sequentially, re-checking against the current state so topology
    // is preserved exactly.
    int removed = 0;
    for (const auto& [x, y, z] : border) {
      const int nb = object_neighbors(x, y, z);
      if (nb <= 1) continue;  // endpoint, keep
      if (!object_connected_without(x, y, z)) continue;
      if (!background_connected(x, y, z)) continue;
      clear(x, y, z);
      ++removed;
    }
    return removed;
  }

  int res_;
  std::vector<uint8_t> occ_;
};

}  // namespace

std::vector<uint8_t> thin_grid(const geom::VoxelGrid& grid, ThinningMode mode) {
  if (grid.occ.empty()) throw InputError("skeleton: empty voxel grid");
  if (mode == ThinningMode::kSlicewise) return thin_slicewise(grid);
  return VolumeThinner(grid).thin(200);
}

double skeleton_complexity(const geom::VoxelGrid& grid, ThinningMode mode) {
  const std::vector<uint8_t> mask = thin_grid(grid, mode);
  long long n = 0;
  for (uint8_t v : mask) n += v;
  return static_cast<double>(n);
}

}  // namespace shaperank::feat

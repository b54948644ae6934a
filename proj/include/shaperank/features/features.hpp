#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "shaperank/geometry/mesh.hpp"
#include "shaperank/geometry/obb.hpp"
#include "shaperank/geometry/point_cloud.hpp"
#include "shaperank/geometry/voxel.hpp"

namespace shaperank::feat {

constexpr int kFeatureCount = 12;

// The descriptor set, in canonical column order. All entries are finite for
// any valid extraction.
struct FeatureVector {
  double mean_curvature = 0.0;
  double curvature_variance = 0.0;
  double median_curvature = 0.0;
  double surface_to_volume_ratio = 0.0;
  double convexity_ratio = 0.0;
  double aspect_ratio_x = 0.0;
  double aspect_ratio_y = 0.0;
  double aspect_ratio_z = 0.0;
  double silhouette_complexity = 0.0;
  double multiview_silhouette_complexity = 0.0;
  double hollow_ratio = 0.0;
  double skeleton_complexity = 0.0;

  std::array<double, kFeatureCount> values() const;
  double operator[](int i) const { return values()[static_cast<size_t>(i)]; }

  // Canonical short names, used as CSV column headers.
  static const std::array<std::string, kFeatureCount>& names();
};

enum class ThinningMode { kSlicewise, kVolumetric };

struct FeatureConfig {
  int cloud_points = 2048;
  int curvature_k = 20;
  int voxel_resolution = 64;
  int n_planes = 8;
  int n_views = 8;
  ThinningMode thinning = ThinningMode::kSlicewise;
  bool sample_vertices = false;  // take the cloud from mesh vertices instead of sampling
  uint64_t seed = 42;
};

struct CurvatureStats {
  double mean = 0.0;
  double variance = 0.0;
  double median = 0.0;
};

// Per-point surface variation, the smallest covariance eigenvalue of the
// k-nearest-neighbor patch over the eigenvalue sum. Bounded in [0, 1/3];
// near 0 on flat patches.
std::vector<double> curvature_values(const geom::PointCloud& cloud, int k);
std::vector<double> curvature_values_serial(const geom::PointCloud& cloud, int k);
CurvatureStats curvature_features(const geom::PointCloud& cloud, int k);

double surface_to_volume(const geom::Mesh& mesh);
double convexity_ratio(const geom::Mesh& mesh);
double hollow_ratio(const geom::Mesh& mesh);

struct AspectRatios {
  double x = 0.0, y = 0.0, z = 0.0;  // ex/ey, ey/ez, ez/ex
};
AspectRatios aspect_ratios(const geom::Obb& box);

// Cross-section segment count summed over n_planes slicing planes spread
// along the longest OBB axis (5% margin off each end). Collinear chords from
// neighboring triangles are merged so triangulation density does not inflate
// the count.
double silhouette_complexity(const geom::Mesh& mesh, int n_planes = 8);

// Sum of silhouette complexities of copies rotated about Z by i*pi/n_views.
// The slicing direction is taken from the input mesh once and held fixed, so
// the rotated copies are genuinely different views.
double multiview_silhouette_complexity(const geom::Mesh& mesh, int n_views = 8,
                                       int n_planes = 8);

// Occupied-voxel count remaining after thinning to a fixpoint.
double skeleton_complexity(const geom::VoxelGrid& grid,
                           ThinningMode mode = ThinningMode::kSlicewise);
// Survivor mask, exposed for inspection in tests and dumps.
std::vector<uint8_t> thin_grid(const geom::VoxelGrid& grid, ThinningMode mode);

struct ExtractionNotes {
  bool volume_from_voxels = false;  // mesh was open, volume is the voxel estimate
  int degenerate_faces_dropped = 0;
};

FeatureVector extract_all(const geom::Mesh& mesh, const FeatureConfig& config,
                          ExtractionNotes* notes = nullptr);

}  // namespace shaperank::feat

#include "shaperank/features/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shaperank/core/error.hpp"
#include "shaperank/geometry/convex_hull.hpp"

namespace shaperank::feat {

std::array<double, kFeatureCount> FeatureVector::values() const {
  return {mean_curvature,
          curvature_variance,
          median_curvature,
          surface_to_volume_ratio,
          convexity_ratio,
          aspect_ratio_x,
          aspect_ratio_y,
          aspect_ratio_z,
          silhouette_complexity,
          multiview_silhouette_complexity,
          hollow_ratio,
          skeleton_complexity};
}

const std::array<std::string, kFeatureCount>& FeatureVector::names() {
  static const std::array<std::string, kFeatureCount> kNames = {
      "Mean Curv",  "Curv Var", "Med Curv",     "S/V Ratio",    "Convexity",    "AR X",
      "AR Y",       "AR Z",     "Silh Comp",    "MV Silh Comp", "Hollow Ratio", "Skel Comp"};
  return kNames;
}

namespace {

double checked_volume(const geom::Mesh& mesh, bool* from_voxels, int resolution = 64) {
  const geom::VolumeEstimate est = geom::mesh_volume(mesh, resolution);
  if (from_voxels) *from_voxels = est.voxel_fallback;
  if (!(est.value > 0.0)) throw InputError("volume is zero");
  return est.value;
}

double hull_volume(const geom::Mesh& mesh) {
  const geom::Mesh hull = geom::convex_hull_of_mesh(mesh);
  const double v = geom::signed_volume(hull);
  if (!(v > 0.0)) throw InputError("convex hull volume is zero");
  return v;
}

}  // namespace

double surface_to_volume(const geom::Mesh& mesh) {
  return geom::mesh_surface_area(mesh) / checked_volume(mesh, nullptr);
}

double convexity_ratio(const geom::Mesh& mesh) {
  const double ratio = checked_volume(mesh, nullptr) / hull_volume(mesh);
  return std::min(ratio, 1.0);
}

double hollow_ratio(const geom::Mesh& mesh) { return 1.0 - convexity_ratio(mesh); }

AspectRatios aspect_ratios(const geom::Obb& box) {
  for (int i = 0; i < 3; ++i)
    if (!(box.extents[i] > 0.0)) throw InputError("aspect_ratios: zero box extent");
  return {box.extents[0] / box.extents[1], box.extents[1] / box.extents[2],
          box.extents[2] / box.extents[0]};
}

namespace {

template <typename F>
auto compute(const char* feature_name, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(std::string("feature '") + feature_name + "': " + e.what());
  }
}

}  // namespace

FeatureVector extract_all(const geom::Mesh& mesh, const FeatureConfig& config,
                          ExtractionNotes* notes) {
  if (mesh.empty()) throw InputError("extract_all: empty mesh");
  FeatureVector out;
  if (notes) *notes = ExtractionNotes{};
  if (notes) notes->degenerate_faces_dropped = mesh.degenerate_dropped;

  const auto cloud = compute("curvature", [&] {
    return config.sample_vertices ? geom::vertex_point_cloud(mesh)
                                  : geom::sample_point_cloud(mesh, config.cloud_points, config.seed);
  });
  const CurvatureStats curv =
      compute("curvature", [&] { return curvature_features(cloud, config.curvature_k); });
  out.mean_curvature = curv.mean;
  out.curvature_variance = curv.variance;
  out.median_curvature = curv.median;

  bool from_voxels = false;
  const double volume =
      compute("s/v ratio", [&] { return checked_volume(mesh, &from_voxels, config.voxel_resolution); });
  if (notes) notes->volume_from_voxels = from_voxels;
  const double area = geom::mesh_surface_area(mesh);
  out.surface_to_volume_ratio = compute("s/v ratio", [&] {
    if (!(volume > 0.0)) throw InputError("volume is zero");
    return area / volume;
  });

  const double hull = compute("convexity", [&] { return hull_volume(mesh); });
  out.convexity_ratio = std::min(volume / hull, 1.0);
  out.hollow_ratio = 1.0 - out.convexity_ratio;

  const geom::Obb box = compute("aspect ratios", [&] { return geom::oriented_bounding_box(mesh); });
  const AspectRatios ar = compute("aspect ratios", [&] { return aspect_ratios(box); });
  out.aspect_ratio_x = ar.x;
  out.aspect_ratio_y = ar.y;
  out.aspect_ratio_z = ar.z;

  out.silhouette_complexity =
      compute("silhouette", [&] { return silhouette_complexity(mesh, config.n_planes); });
  out.multiview_silhouette_complexity = compute("multiview silhouette", [&] {
    return multiview_silhouette_complexity(mesh, config.n_views, config.n_planes);
  });

  const geom::VoxelGrid grid =
      compute("skeleton", [&] { return geom::voxelize(mesh, config.voxel_resolution); });
  out.skeleton_complexity =
      compute("skeleton", [&] { return skeleton_complexity(grid, config.thinning); });

  for (double v : out.values())
    if (!std::isfinite(v)) throw InputError("extract_all: non-finite feature value");
  return out;
}

}  // namespace shaperank::feat

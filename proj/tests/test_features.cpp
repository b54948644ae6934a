#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <doctest.h>

#include "shaperank/core/error.hpp"
#include "shaperank/features/features.hpp"
#include "shaperank/geometry/convex_hull.hpp"
#include "shaperank/geometry/mesh.hpp"
#include "shaperank/geometry/obb.hpp"
#include "shaperank/geometry/point_cloud.hpp"
#include "shaperank/geometry/primitives.hpp"
#include "shaperank/geometry/voxel.hpp"
#include "shaperank/synth/generators.hpp"

using namespace shaperank;
using geom::Mesh;
using geom::PointCloud;

namespace {

constexpr double kPi = std::numbers::pi;

// Extruded star polygon: 2*spikes alternating outer/inner radii, capped with
// center fans. Lots of silhouette edges per cross-section by construction.
Mesh make_star_prism(int spikes, double r_inner, double r_outer, double height) {
  Mesh m;
  const int n = 2 * spikes;
  for (int ring = 0; ring < 2; ++ring) {
    const double z = (ring == 0 ? -0.5 : 0.5) * height;
    for (int i = 0; i < n; ++i) {
      const double r = (i % 2 == 0) ? r_outer : r_inner;
      const double a = kPi * i / spikes;
      m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
  }
  const int bc = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, -0.5 * height);
  const int tc = bc + 1;
  m.vertices.emplace_back(0.0, 0.0, 0.5 * height);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    m.faces.push_back({i, j, n + j});
    m.faces.push_back({i, n + j, n + i});
    m.faces.push_back({bc, j, i});
    m.faces.push_back({tc, n + i, n + j});
  }
  geom::repair_winding(m);
  geom::recompute_vertex_normals(m);
  return m;
}

// Two unit cubes sharing one vertical edge: an L whose convex hull is the
// hexagonal prism of volume 3 over solid volume 2.
Mesh make_l_bracket() {
  Mesh m = geom::translated(geom::make_box(1, 1, 1), {0.5, 0.5, 0.5});
  geom::append_mesh(m, geom::translated(geom::make_box(1, 1, 1), {1.5, 1.5, 0.5}));
  return m;
}

PointCloud grid_cloud(int nx, int ny, double spacing,
                      double (*zf)(double, double)) {
  PointCloud cloud;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double x = (i - 0.5 * (nx - 1)) * spacing;
      const double y = (j - 0.5 * (ny - 1)) * spacing;
      cloud.points.emplace_back(x, y, zf(x, y));
      cloud.source_face.push_back(-1);
    }
  }
  return cloud;
}

}  // namespace

TEST_CASE("curvature: flat patches score zero") {
  auto cloud = grid_cloud(30, 30, 0.05, [](double, double) { return 0.0; });
  auto values = feat::curvature_values(cloud, 20);
  REQUIRE(values.size() == cloud.size());
  for (double v : values) {
    CHECK(v >= 0.0);
    CHECK(v < 1e-9);
  }
  auto stats = feat::curvature_features(cloud, 20);
  CHECK(stats.mean < 1e-9);
  CHECK(stats.variance < 1e-18);
  CHECK(stats.median < 1e-9);
}

TEST_CASE("curvature: sphere is uniformly curved") {
  Mesh sphere = geom::make_icosphere(1.0, 4);
  PointCloud cloud = geom::sample_point_cloud(sphere, 2000, 7);
  auto values = feat::curvature_values(cloud, 20);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  CHECK(median > 1e-5);
  for (double v : values) {
    CHECK(v > 0.2 * median);
    CHECK(v < 5.0 * median);
  }
  auto stats = feat::curvature_features(cloud, 20);
  CHECK(stats.mean > 1e-4);
  CHECK(stats.mean < 0.05);
  CHECK(stats.variance < stats.mean * stats.mean);
}

TEST_CASE("curvature: a bump pulls the mean above the median") {
  auto bump = [](double x, double y) {
    return 0.3 * std::exp(-(x * x + y * y) / 0.05);
  };
  auto cloud = grid_cloud(40, 40, 0.05, bump);
  auto stats = feat::curvature_features(cloud, 20);
  CHECK(stats.mean > 1e-6);
  CHECK(stats.median < stats.mean);
  CHECK(stats.median < 0.25 * stats.mean);  // bent region is a small minority
}

TEST_CASE("curvature: parallel path matches the serial reference") {
  Mesh sphere = geom::make_icosphere(1.0, 3);
  PointCloud cloud = geom::sample_point_cloud(sphere, 1500, 99);
  auto par = feat::curvature_values(cloud, 20);
  auto ser = feat::curvature_values_serial(cloud, 20);
  REQUIRE(par.size() == ser.size());
  for (size_t i = 0; i < par.size(); ++i) CHECK(par[i] == ser[i]);
}

TEST_CASE("curvature: neighborhood size is validated") {
  auto cloud = grid_cloud(5, 4, 0.1, [](double, double) { return 0.0; });  // 20 pts
  CHECK_THROWS_AS(feat::curvature_values(cloud, 21), InputError);
  CHECK_THROWS_AS(feat::curvature_values(cloud, 2), InputError);
  CHECK_NOTHROW(feat::curvature_values(cloud, 20));
}

TEST_CASE("aspect ratios are cyclic extent ratios") {
  geom::Obb box = geom::oriented_bounding_box(geom::make_box(1, 2, 3));
  auto ar = feat::aspect_ratios(box);
  CHECK(ar.x == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ar.y == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(ar.z == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(ar.x * ar.y * ar.z == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("silhouette: cube sections are squares") {
  CHECK(feat::silhouette_complexity(geom::make_box(1, 1, 1), 8) == 32.0);
}

TEST_CASE("silhouette: cylinder sections count the polygon sides") {
  Mesh cyl = geom::make_cylinder(0.5, 2.0, 64);
  CHECK(feat::silhouette_complexity(cyl, 8) == 8.0 * 64.0);
}

TEST_CASE("silhouette: spiky profiles count more than round ones") {
  Mesh star = make_star_prism(40, 0.3, 0.7, 2.0);
  Mesh cyl = geom::make_cylinder(0.5, 2.0, 64);
  const double s_star = feat::silhouette_complexity(star, 8);
  const double s_cyl = feat::silhouette_complexity(cyl, 8);
  CHECK(s_star == 8.0 * 80.0);
  CHECK(s_star > s_cyl);
}

TEST_CASE("silhouette: one view reduces the multi-view sum") {
  Mesh star = make_star_prism(16, 0.3, 0.7, 2.0);
  CHECK(feat::multiview_silhouette_complexity(star, 1, 8) ==
        feat::silhouette_complexity(star, 8));
}

TEST_CASE("silhouette: rotationally symmetric solids have equal views") {
  Mesh cyl = geom::make_cylinder(0.5, 2.0, 64);
  CHECK(feat::multiview_silhouette_complexity(cyl, 8, 8) ==
        8.0 * feat::silhouette_complexity(cyl, 8));
}

TEST_CASE("silhouette: doubling the view count doubles the sum") {
  Mesh star = make_star_prism(40, 0.3, 0.7, 2.0);
  const double mv4 = feat::multiview_silhouette_complexity(star, 4, 8);
  const double mv8 = feat::multiview_silhouette_complexity(star, 8, 8);
  REQUIRE(mv4 > 0.0);
  CHECK(mv8 / mv4 >= 1.8);
  CHECK(mv8 / mv4 <= 2.2);
}

TEST_CASE("silhouette: slicing axis follows a rotated mesh") {
  Mesh star = make_star_prism(16, 0.3, 0.7, 2.0);
  Eigen::Matrix3d rx;
  rx = Eigen::AngleAxisd(kPi / 6.0, Eigen::Vector3d::UnitX());
  Mesh rot = geom::rotated(star, rx);
  CHECK(feat::silhouette_complexity(rot, 8) ==
        feat::silhouette_complexity(star, 8));
}

TEST_CASE("skeleton: straight rod thins to roughly its length") {
  Mesh rod = geom::make_box(0.05, 0.05, 1.0);
  geom::VoxelGrid grid = geom::voxelize(rod, 64);
  const double len = 62.0;  // rod spans resolution-2 cells along z
  const double slice = feat::skeleton_complexity(grid, feat::ThinningMode::kSlicewise);
  CHECK(slice >= 0.8 * len);
  CHECK(slice <= 1.2 * len);
  const double vol = feat::skeleton_complexity(grid, feat::ThinningMode::kVolumetric);
  CHECK(vol >= 0.8 * len);
  CHECK(vol <= 1.2 * len);
}

TEST_CASE("skeleton: solid cube collapses far below its voxel count") {
  geom::VoxelGrid g64 = geom::voxelize(geom::make_box(1, 1, 1), 64);
  const double occupied = static_cast<double>(g64.occupied_count());
  const double slice = feat::skeleton_complexity(g64, feat::ThinningMode::kSlicewise);
  CHECK(slice > 0.0);
  CHECK(slice < occupied / 10.0);

  geom::VoxelGrid g32 = geom::voxelize(geom::make_box(1, 1, 1), 32);
  const double occ32 = static_cast<double>(g32.occupied_count());
  const double vol = feat::skeleton_complexity(g32, feat::ThinningMode::kVolumetric);
  CHECK(vol > 0.0);
  CHECK(vol < occ32 / 10.0);
}

TEST_CASE("skeleton: parallel prongs add their lengths") {
  synth::ShapeSpec spec;
  spec.kind = synth::Generator::kProngUnion;
  spec.prongs = 3;
  spec.prong_length = 1.0;
  Mesh prongs = synth::generate_shape(spec);
  geom::VoxelGrid grid = geom::voxelize(prongs, 64);
  const double count = feat::skeleton_complexity(grid, feat::ThinningMode::kSlicewise);
  const double expected = 3.0 * 62.0;
  CHECK(count >= 0.8 * expected);
  CHECK(count <= 1.2 * expected);
}

TEST_CASE("skeleton: survivors are occupied cells") {
  Mesh torus = geom::make_torus(1.0, 0.3, 48, 24);
  geom::VoxelGrid grid = geom::voxelize(torus, 48);
  auto mask = feat::thin_grid(grid, feat::ThinningMode::kSlicewise);
  REQUIRE(mask.size() == grid.occ.size());
  long long survivors = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      ++survivors;
      CHECK(grid.occ[i] != geom::kVoxEmpty);
    }
  }
  CHECK(static_cast<double>(survivors) ==
        feat::skeleton_complexity(grid, feat::ThinningMode::kSlicewise));
  CHECK(survivors > 0);
}

TEST_CASE("extract: cube golden values") {
  feat::FeatureConfig cfg;
  feat::ExtractionNotes notes;
  feat::FeatureVector f = feat::extract_all(geom::make_box(1, 1, 1), cfg, &notes);
  CHECK(f.surface_to_volume_ratio == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(f.convexity_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.hollow_ratio == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(f.aspect_ratio_x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.aspect_ratio_y == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.aspect_ratio_z == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.silhouette_complexity == 32.0);
  // Every rotated view of a vertical prism still sections as a quadrilateral.
  CHECK(f.multiview_silhouette_complexity == 256.0);
  CHECK(f.mean_curvature >= 0.0);
  CHECK(f.mean_curvature < 0.1);
  CHECK(f.median_curvature <= f.mean_curvature + 1e-12);
  CHECK(f.skeleton_complexity > 0.0);
  CHECK(!notes.volume_from_voxels);
  CHECK(notes.degenerate_faces_dropped == 0);
}

TEST_CASE("extract: sphere golden values") {
  feat::FeatureConfig cfg;
  feat::FeatureVector f = feat::extract_all(geom::make_icosphere(1.0, 3), cfg);
  CHECK(f.surface_to_volume_ratio == doctest::Approx(3.0).epsilon(0.01));
  CHECK(f.convexity_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.hollow_ratio < 1e-9);
  CHECK(f.aspect_ratio_x == doctest::Approx(1.0).epsilon(0.05));
  CHECK(f.aspect_ratio_y == doctest::Approx(1.0).epsilon(0.05));
  CHECK(f.aspect_ratio_z == doctest::Approx(1.0).epsilon(0.05));
  CHECK(f.curvature_variance < 1e-3);
  CHECK(f.mean_curvature > 0.0);
}

TEST_CASE("extract: L bracket convexity is two thirds") {
  feat::FeatureConfig cfg;
  feat::FeatureVector f = feat::extract_all(make_l_bracket(), cfg);
  CHECK(f.convexity_ratio == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(f.hollow_ratio == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("extract: open cavity box keeps its hull") {
  synth::ShapeSpec spec;
  spec.kind = synth::Generator::kCavityBox;
  spec.cavity_fraction = 0.5;
  feat::FeatureConfig cfg;
  feat::ExtractionNotes notes;
  feat::FeatureVector f = feat::extract_all(synth::generate_shape(spec), cfg, &notes);
  CHECK(!notes.volume_from_voxels);  // cavity surface is still closed
  CHECK(f.convexity_ratio == doctest::Approx(0.875).epsilon(1e-6));
  CHECK(f.hollow_ratio == doctest::Approx(0.125).epsilon(1e-6));
}

TEST_CASE("extract: torus hollowness matches rotation volumes") {
  const double R = 1.0, r = 0.3;
  Mesh torus = geom::make_torus(R, r, 64, 32);
  feat::FeatureConfig cfg;
  feat::FeatureVector f = feat::extract_all(torus, cfg);
  const double v_torus = 2.0 * kPi * kPi * R * r * r;
  const double v_hull = kPi * (2.0 * r * R * R + kPi * R * r * r + 4.0 * r * r * r / 3.0);
  const double expected = 1.0 - v_torus / v_hull;
  CHECK(f.hollow_ratio == doctest::Approx(expected).epsilon(0.05));
  CHECK(std::abs(f.hollow_ratio - expected) < 0.02);
}

TEST_CASE("extract: uniform scale changes only absolute features") {
  Mesh star = make_star_prism(12, 0.3, 0.7, 2.0);
  Mesh big = geom::scaled(star, 2.0);  // power of two: sampling reproduces exactly
  feat::FeatureConfig cfg;
  feat::FeatureVector a = feat::extract_all(star, cfg);
  feat::FeatureVector b = feat::extract_all(big, cfg);
  CHECK(b.surface_to_volume_ratio ==
        doctest::Approx(0.5 * a.surface_to_volume_ratio).epsilon(1e-9));
  CHECK(b.convexity_ratio == doctest::Approx(a.convexity_ratio).epsilon(1e-9));
  CHECK(b.hollow_ratio == doctest::Approx(a.hollow_ratio).scale(1.0).epsilon(1e-9));
  CHECK(b.aspect_ratio_x == doctest::Approx(a.aspect_ratio_x).epsilon(1e-9));
  CHECK(b.aspect_ratio_y == doctest::Approx(a.aspect_ratio_y).epsilon(1e-9));
  CHECK(b.aspect_ratio_z == doctest::Approx(a.aspect_ratio_z).epsilon(1e-9));
  CHECK(b.silhouette_complexity == a.silhouette_complexity);
  CHECK(b.multiview_silhouette_complexity == a.multiview_silhouette_complexity);
  CHECK(b.skeleton_complexity == a.skeleton_complexity);
  CHECK(b.mean_curvature == doctest::Approx(a.mean_curvature).epsilon(1e-9));
  CHECK(b.curvature_variance ==
        doctest::Approx(a.curvature_variance).scale(1e-6).epsilon(1e-9));
  CHECK(b.median_curvature ==
        doctest::Approx(a.median_curvature).scale(1e-9).epsilon(1e-9));
}

TEST_CASE("extract: rigid motion leaves intrinsic features alone") {
  Mesh l = make_l_bracket();
  Mesh moved = geom::translated(geom::rotated(l, geom::rotation_about_z(0.3)),
                                {0.1, 0.2, 0.3});
  feat::FeatureConfig cfg;
  feat::FeatureVector a = feat::extract_all(l, cfg);
  feat::FeatureVector b = feat::extract_all(moved, cfg);
  CHECK(b.surface_to_volume_ratio ==
        doctest::Approx(a.surface_to_volume_ratio).epsilon(1e-9));
  CHECK(b.convexity_ratio == doctest::Approx(a.convexity_ratio).epsilon(1e-9));
  CHECK(b.hollow_ratio == doctest::Approx(a.hollow_ratio).epsilon(1e-9));
  CHECK(b.aspect_ratio_x == doctest::Approx(a.aspect_ratio_x).epsilon(1e-6));
  CHECK(b.aspect_ratio_y == doctest::Approx(a.aspect_ratio_y).epsilon(1e-6));
  CHECK(b.aspect_ratio_z == doctest::Approx(a.aspect_ratio_z).epsilon(1e-6));
  CHECK(b.silhouette_complexity == a.silhouette_complexity);
  CHECK(b.mean_curvature == doctest::Approx(a.mean_curvature).epsilon(1e-6));
}

TEST_CASE("extract: determinism under a fixed config") {
  Mesh star = make_star_prism(10, 0.25, 0.6, 1.5);
  feat::FeatureConfig cfg;
  cfg.seed = 1234;
  feat::FeatureVector a = feat::extract_all(star, cfg);
  feat::FeatureVector b = feat::extract_all(star, cfg);
  auto va = a.values(), vb = b.values();
  for (int i = 0; i < feat::kFeatureCount; ++i) CHECK(va[i] == vb[i]);
}

TEST_CASE("extract: vector invariants hold across a mixed corpus") {
  std::vector<Mesh> corpus;
  corpus.push_back(geom::make_box(1, 1, 1));
  corpus.push_back(geom::make_box(0.4, 1.0, 2.5));
  corpus.push_back(geom::make_icosphere(1.0, 2));
  corpus.push_back(geom::make_cylinder(0.5, 2.0, 32));
  corpus.push_back(geom::make_torus(1.0, 0.3, 32, 16));
  corpus.push_back(make_l_bracket());
  corpus.push_back(make_star_prism(8, 0.3, 0.7, 1.0));
  for (double frac : {0.3, 0.5, 0.7}) {
    synth::ShapeSpec spec;
    spec.kind = synth::Generator::kCavityBox;
    spec.cavity_fraction = frac;
    corpus.push_back(synth::generate_shape(spec));
  }
  {
    synth::ShapeSpec spec;
    spec.kind = synth::Generator::kLathe;
    spec.radius = 0.4;
    spec.height = 1.6;
    spec.wiggle = 0.3;
    corpus.push_back(synth::generate_shape(spec));
  }

  feat::FeatureConfig cfg;
  cfg.cloud_points = 1024;  // keep the loop quick
  for (const Mesh& mesh : corpus) {
    feat::FeatureVector f = feat::extract_all(mesh, cfg);
    auto vals = f.values();
    for (double v : vals) CHECK(std::isfinite(v));
    CHECK(f.convexity_ratio <= 1.0 + 1e-6);
    CHECK(f.aspect_ratio_x * f.aspect_ratio_y * f.aspect_ratio_z ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f.hollow_ratio == doctest::Approx(1.0 - f.convexity_ratio).scale(1.0).epsilon(1e-6));
  }

  const auto& names = feat::FeatureVector::names();
  CHECK(names.size() == feat::kFeatureCount);
  std::set<std::string> unique(names.begin(), names.end());
  CHECK(unique.size() == names.size());
}

TEST_CASE("extract: open mesh flags the voxel volume fallback") {
  Mesh open_cube = geom::make_box(1, 1, 1);
  open_cube.faces.pop_back();
  geom::recompute_vertex_normals(open_cube);
  feat::FeatureConfig cfg;
  feat::ExtractionNotes notes;
  feat::FeatureVector f = feat::extract_all(open_cube, cfg, &notes);
  CHECK(notes.volume_from_voxels);
  for (double v : f.values()) CHECK(std::isfinite(v));
  CHECK(f.convexity_ratio <= 1.0 + 1e-6);
}

TEST_CASE("extract: vertex clouds skip sampling") {
  Mesh sphere = geom::make_icosphere(1.0, 3);
  feat::FeatureConfig cfg;
  cfg.sample_vertices = true;
  feat::FeatureVector a = feat::extract_all(sphere, cfg);
  cfg.seed = 999;  // irrelevant in vertex mode
  feat::FeatureVector b = feat::extract_all(sphere, cfg);
  auto va = a.values(), vb = b.values();
  for (int i = 0; i < feat::kFeatureCount; ++i) CHECK(va[i] == vb[i]);
  CHECK(a.mean_curvature > 0.0);
}

TEST_CASE("generators: knob ranges are validated") {
  synth::ShapeSpec spec;
  spec.kind = synth::Generator::kCavityBox;
  spec.cavity_fraction = 0.95;
  CHECK_THROWS_AS(synth::generate_shape(spec), InputError);
  spec.kind = synth::Generator::kLathe;
  spec.cavity_fraction = 0.5;
  spec.wiggle = 1.5;
  CHECK_THROWS_AS(synth::generate_shape(spec), InputError);
  spec.wiggle = 0.2;
  spec.segments = 2;
  CHECK_THROWS_AS(synth::generate_shape(spec), InputError);
  CHECK(synth::parse_generator("lathe") == synth::Generator::kLathe);
  CHECK_THROWS_AS(synth::parse_generator("mystery"), InputError);
}

TEST_CASE("generators: outputs are watertight and oriented") {
  std::vector<synth::ShapeSpec> specs(5);
  specs[0].kind = synth::Generator::kBox;
  specs[1].kind = synth::Generator::kCylinder;
  specs[2].kind = synth::Generator::kLathe;
  specs[2].wiggle = 0.4;
  specs[3].kind = synth::Generator::kProngUnion;
  specs[3].prongs = 4;
  specs[4].kind = synth::Generator::kCavityBox;
  for (const auto& spec : specs) {
    Mesh m = synth::generate_shape(spec);
    CHECK(geom::is_watertight(m));
    CHECK(geom::is_consistently_oriented(m));
    CHECK(geom::signed_volume(m) > 0.0);
    Mesh again = synth::generate_shape(spec);
    REQUIRE(again.vertices.size() == m.vertices.size());
    for (size_t i = 0; i < m.vertices.size(); ++i)
      CHECK(again.vertices[i] == m.vertices[i]);
  }
}

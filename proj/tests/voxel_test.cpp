#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "testutil.hpp"

using namespace nbvox;

namespace {

GridSpec small_spec(int n = 8, double vs = 0.01,
                    const Vec3& origin = Vec3(-0.04, -0.04, -0.04)) {
  GridSpec s;
  s.resolution = n;
  s.voxel_size = vs;
  s.origin = origin;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec

TEST(GridSpec, IndexIsBijectiveAndYFastest) {
  const GridSpec s = small_spec(5);
  std::vector<char> seen(s.cell_count(), 0);
  for (int x = 0; x < 5; ++x)
    for (int y = 0; y < 5; ++y)
      for (int z = 0; z < 5; ++z) {
        const std::size_t i = s.index(x, y, z);
        ASSERT_LT(i, s.cell_count());
        ASSERT_EQ(seen[i], 0);
        seen[i] = 1;
      }
  // y is the fastest axis, then z, then x.
  EXPECT_EQ(s.index(0, 1, 0), s.index(0, 0, 0) + 1);
  EXPECT_EQ(s.index(0, 0, 1), s.index(0, 0, 0) + 5);
  EXPECT_EQ(s.index(1, 0, 0), s.index(0, 0, 0) + 25);
}

TEST(GridSpec, CellCenterAndCellOfInverse) {
  const GridSpec s = small_spec();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3i c(static_cast<int>(rng.uniform_int(0, 7)),
                  static_cast<int>(rng.uniform_int(0, 7)),
                  static_cast<int>(rng.uniform_int(0, 7)));
    EXPECT_EQ(s.cell_of(s.cell_center(c)), c);
  }
  // Points exactly on the max face fall outside.
  EXPECT_FALSE(s.in_bounds(s.cell_of(s.bounds_max())));
  EXPECT_TRUE(s.in_bounds(s.cell_of(s.bounds_min())));
}

TEST(GridSpec, Validation) {
  GridSpec s = small_spec();
  EXPECT_NO_THROW(s.validate());
  s.voxel_size = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.resolution = 0;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(FitSpec, CubicalPaddedCover) {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {0.2, 0.1, 0.05}};
  const GridSpec s = fit_spec(cloud, 32, 0.05);
  // Cube side: largest extent plus 5 percent padding per face.
  EXPECT_NEAR(s.side_length(), 0.2 * 1.1, 1e-12);
  EXPECT_NEAR(s.voxel_size, 0.2 * 1.1 / 32, 1e-12);
  for (const Vec3& p : cloud.points) {
    EXPECT_TRUE((p.array() >= s.bounds_min().array()).all());
    EXPECT_TRUE((p.array() <= s.bounds_max().array()).all());
  }
  // Center of the cube is the center of the bounds.
  EXPECT_TRUE(((s.bounds_min() + s.bounds_max()) / 2)
                  .isApprox(Vec3(0.1, 0.05, 0.025), 1e-12));

  EXPECT_THROW(fit_spec(PointCloud{}, 32), DegenerateInputError);
  PointCloud point;
  point.points = {{1, 1, 1}};
  EXPECT_THROW(fit_spec(point, 32), DegenerateInputError);
}

TEST(Threshold, BoundaryTieIsOccupied) {
  ScoreGrid g(small_spec(2));
  g.scores = {0.0f, 0.25f, 0.4999f, 0.5f, 0.5001f, 0.75f, 1.0f, 0.5f};
  const BinaryGrid occ = threshold_grid(g, 0.5);
  const std::vector<std::uint8_t> expect = {0, 0, 0, 1, 1, 1, 1, 1};
  EXPECT_EQ(occ.occupied, expect);
  // Boundary 1.0 keeps only fully confident cells.
  EXPECT_EQ(threshold_grid(g, 1.0).count(), 1u);
}

TEST(Uncertain, ClosedIntervalAndTraversalOrder) {
  ScoreGrid g(small_spec(3));
  // Band edges chosen exactly representable in binary so the inclusive
  // bounds are testable: 0.5 +- 0.125 is [0.375, 0.625].
  g.set(Vec3i(0, 0, 0), 0.375f);
  g.set(Vec3i(1, 0, 0), 0.625f);
  g.set(Vec3i(2, 0, 0), 0.3749f);
  g.set(Vec3i(0, 1, 0), 0.6251f);
  for (std::size_t i = 0; i < g.scores.size(); ++i)
    if (g.scores[i] == 0.5f) g.scores[i] = 0.9f;
  g.set(Vec3i(2, 2, 2), 0.5f);

  const UncertainSet u = uncertain_voxels(g, 0.125, 0.5);
  std::vector<Vec3i> cells = u.cells;
  ASSERT_EQ(cells.size(), 3u);
  // Storage order: x outer, then z, then y.
  EXPECT_EQ(cells[0], Vec3i(0, 0, 0));
  EXPECT_EQ(cells[1], Vec3i(1, 0, 0));
  EXPECT_EQ(cells[2], Vec3i(2, 2, 2));
  EXPECT_EQ(u.centers().size(), 3u);
  EXPECT_TRUE(u.centers().points[0].isApprox(g.spec.cell_center(cells[0])));

  EXPECT_THROW(uncertain_voxels(g, -0.1), ValidationError);
}

TEST(VoxelizeCloud, OutOfBoundsIgnored) {
  const GridSpec s = small_spec();
  PointCloud cloud;
  cloud.points = {s.cell_center(Vec3i(1, 2, 3)), Vec3(10, 10, 10),
                  s.bounds_max()};
  const BinaryGrid g = voxelize_cloud(cloud, s);
  EXPECT_EQ(g.count(), 1u);
  EXPECT_TRUE(g.get(Vec3i(1, 2, 3)));
}

// ---------------------------------------------------------------------------
// binvox

TEST(Binvox, RoundTripRandomDensities) {
  tt::TempDir dir;
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 24));
    GridSpec spec;
    spec.resolution = n;
    spec.voxel_size = rng.uniform(0.001, 0.1);
    spec.origin = Vec3(rng.normal(), rng.normal(), rng.normal());
    BinaryGrid g(spec);
    const double density = rng.uniform();
    for (auto& v : g.occupied) v = rng.uniform() < density;

    const std::string path = dir.file("g.binvox");
    save_binvox(g, path);
    const BinaryGrid back = load_binvox(path);
    EXPECT_TRUE(back.spec == g.spec);
    EXPECT_EQ(back.occupied, g.occupied);
  }
}

TEST(Binvox, LongRunsSplit) {
  // A uniform grid longer than 255 cells per run exercises run splitting.
  BinaryGrid g(small_spec(16, 0.01, Vec3::Zero()));
  std::fill(g.occupied.begin(), g.occupied.end(), 1);
  tt::TempDir dir;
  save_binvox(g, dir.file("full.binvox"));
  const BinaryGrid back = load_binvox(dir.file("full.binvox"));
  EXPECT_EQ(back.occupied, g.occupied);
  EXPECT_EQ(back.count(), g.spec.cell_count());
}

TEST(Binvox, StorageOrderOnDisk) {
  // One marked cell must land at byte offset x*n*n + z*n + y of the decoded
  // payload: x slowest, then z, then y.
  const int n = 4;
  BinaryGrid g(small_spec(n, 0.01, Vec3::Zero()));
  const Vec3i cell(1, 2, 3);
  g.set(cell, true);
  std::ostringstream out;
  save_binvox(g, out);
  const std::string blob = out.str();
  const auto data_pos = blob.find("data\n");
  ASSERT_NE(data_pos, std::string::npos);
  std::string decoded;
  for (std::size_t i = data_pos + 5; i + 1 < blob.size(); i += 2) {
    const auto value = static_cast<unsigned char>(blob[i]);
    const auto count = static_cast<unsigned char>(blob[i + 1]);
    decoded.append(count, static_cast<char>(value));
  }
  ASSERT_EQ(decoded.size(), g.spec.cell_count());
  const std::size_t offset = static_cast<std::size_t>(
      cell.x() * n * n + cell.z() * n + cell.y());
  for (std::size_t i = 0; i < decoded.size(); ++i)
    EXPECT_EQ(decoded[i] != 0, i == offset);
}

TEST(Binvox, HeaderAndPayloadErrors) {
  tt::TempDir dir;
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir.file(name), std::ios::binary);
    f << content;
    return dir.file(name);
  };
  EXPECT_THROW(load_binvox(dir.file("missing.binvox")), IoError);
  EXPECT_THROW(load_binvox(write("m.binvox", "#notvox 1\n")), ParseError);
  EXPECT_THROW(
      load_binvox(write("d.binvox",
                        "#binvox 1\ndim 2 2 3\ntranslate 0 0 0\nscale 1\n"
                        "data\n")),
      ParseError);
  // Truncated payload: 8 cells declared, 4 encoded.
  EXPECT_THROW(
      load_binvox(write("t.binvox",
                        std::string("#binvox 1\ndim 2 2 2\ntranslate 0 0 0\n"
                                    "scale 1\ndata\n") +
                            std::string("\x01\x04", 2))),
      ParseError);
  // Overlong payload.
  EXPECT_THROW(
      load_binvox(write("o.binvox",
                        std::string("#binvox 1\ndim 2 2 2\ntranslate 0 0 0\n"
                                    "scale 1\ndata\n") +
                            std::string("\x01\x08\x00\x01", 4))),
      ParseError);
  // Byte values other than 0/1 rejected.
  EXPECT_THROW(
      load_binvox(write("v.binvox",
                        std::string("#binvox 1\ndim 2 2 2\ntranslate 0 0 0\n"
                                    "scale 1\ndata\n") +
                            std::string("\x02\x08", 2))),
      ParseError);
}

TEST(Binvox, UnknownHeaderLinesSkipped) {
  tt::TempDir dir;
  const std::string path = dir.file("x.binvox");
  {
    std::ofstream f(path, std::ios::binary);
    f << "#binvox 1\ndim 2 2 2\nfancy_extension 7\ntranslate 0.5 0 0\n"
      << "scale 2\ndata\n"
      << std::string("\x00\x08", 2);
  }
  const BinaryGrid g = load_binvox(path);
  EXPECT_EQ(g.spec.resolution, 2);
  EXPECT_EQ(g.count(), 0u);
  EXPECT_NEAR(g.spec.origin.x(), 0.5, 0);
  EXPECT_NEAR(g.spec.side_length(), 2.0, 1e-15);
}

// ---------------------------------------------------------------------------
// score grids

TEST(ScoreIo, RoundTripBitExact) {
  tt::TempDir dir;
  Rng rng(43);
  ScoreGrid g(small_spec(9, 0.013, Vec3(0.1, -0.2, 0.3)));
  for (auto& s : g.scores) s = static_cast<float>(rng.uniform());
  g.scores[0] = 0.0f;
  g.scores[1] = 1.0f;
  g.scores[2] = 0.5f;
  const std::string path = dir.file("g.sgrid");
  save_score_grid(g, path);
  const ScoreGrid back = load_score_grid(path);
  EXPECT_TRUE(back.spec == g.spec);
  ASSERT_EQ(back.scores.size(), g.scores.size());
  for (std::size_t i = 0; i < g.scores.size(); ++i)
    EXPECT_EQ(std::memcmp(&back.scores[i], &g.scores[i], sizeof(float)), 0);
}

TEST(ScoreIo, RejectsOutOfRangeAndTruncated) {
  tt::TempDir dir;
  ScoreGrid g(small_spec(2));
  g.scores[0] = 1.5f;
  EXPECT_THROW(save_score_grid(g, dir.file("bad.sgrid")), ValidationError);
  g.scores[0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(save_score_grid(g, dir.file("nan.sgrid")), ValidationError);

  g.scores[0] = 0.5f;
  save_score_grid(g, dir.file("ok.sgrid"));
  // Truncate the payload.
  const auto size = std::filesystem::file_size(dir.file("ok.sgrid"));
  std::filesystem::resize_file(dir.file("ok.sgrid"), size - 4);
  EXPECT_THROW(load_score_grid(dir.file("ok.sgrid")), ParseError);
}

// ---------------------------------------------------------------------------
// solid voxelization

TEST(Solid, BoxFillsExactCells) {
  // Box centered in a padded cube: occupied cells are exactly those whose
  // center lies inside the box.
  const TriangleMesh box = tt::box_mesh(0.1, 0.1, 0.1);
  PointCloud verts;
  verts.points = box.vertices;
  const GridSpec spec = fit_spec(verts, 32, 0.05);
  const BinaryGrid g = solid_voxelize(box, spec);
  std::size_t expect = 0;
  for (int x = 0; x < 32; ++x)
    for (int y = 0; y < 32; ++y)
      for (int z = 0; z < 32; ++z) {
        const Vec3 c = spec.cell_center(Vec3i(x, y, z));
        const bool inside = (c.array().abs() < 0.05).all();
        expect += inside;
        EXPECT_EQ(g.get(Vec3i(x, y, z)), inside) << c.transpose();
      }
  EXPECT_EQ(g.count(), expect);
}

TEST(Solid, SphereVolumeConverges) {
  const double r = 0.06;
  const TriangleMesh sphere = tt::uv_sphere(r, 24, 48);
  PointCloud verts;
  verts.points = sphere.vertices;
  const GridSpec spec = fit_spec(verts, 48, 0.05);
  const BinaryGrid g = solid_voxelize(sphere, spec);
  const double vol =
      static_cast<double>(g.count()) * std::pow(spec.voxel_size, 3);
  const double exact = 4.0 / 3.0 * tt::kPi * r * r * r;
  EXPECT_NEAR(vol, exact, 0.05 * exact);
}

TEST(Solid, MatchesParityOracle) {
  // Cell-center containment must agree with an independent parity test.
  // The grid is offset by irrational-ish amounts so centers do not graze
  // symmetry planes of the shapes.
  for (const char* which : {"cone_squat", "torus_ring", "dipyramid_hex"}) {
    TriangleMesh mesh;
    for (const auto& [name, m] : tt::shape_zoo())
      if (name == which) mesh = m;
    mesh = transform_mesh(
        mesh, RigidTransform::translation(Vec3(0.00137, -0.00219, 0.00173)));
    PointCloud verts;
    verts.points = mesh.vertices;
    const GridSpec spec = fit_spec(verts, 20, 0.08);
    const BinaryGrid g = solid_voxelize(mesh, spec);
    int mismatches = 0;
    for (int x = 0; x < 20; ++x)
      for (int y = 0; y < 20; ++y)
        for (int z = 0; z < 20; ++z) {
          const Vec3i c(x, y, z);
          if (g.get(c) != tt::oracle_in_mesh(mesh, spec.cell_center(c)))
            ++mismatches;
        }
    EXPECT_EQ(mismatches, 0) << which;
  }
}

TEST(Solid, EmptyGridForDisjointRegion) {
  const TriangleMesh box = tt::box_mesh(0.05, 0.05, 0.05);
  GridSpec spec = small_spec(8, 0.01, Vec3(10, 10, 10));
  EXPECT_EQ(solid_voxelize(box, spec).count(), 0u);
}

// ---------------------------------------------------------------------------
// segmentation

TEST(Segmentation, BandFilterInclusiveBounds) {
  PointCloud cloud;
  cloud.points = {
      Vec3(0.3, 0, 0.1),   // inside
      Vec3(0.0, 0.25, 0),  // exactly near edge
      Vec3(0.8, 0, 0),     // exactly far edge
      Vec3(0.1, 0.1, 0),   // too near
      Vec3(1.0, 0, 0),     // too far
      Vec3(0, 0, 5.0),     // z does not matter
  };
  const PointCloud out = band_filter(cloud, 0.25, 0.8);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out.points[0], cloud.points[0]);
  EXPECT_EQ(out.points[1], cloud.points[1]);
  EXPECT_EQ(out.points[2], cloud.points[2]);
}

TEST(Segmentation, RansacRecoversSeededPlane) {
  Rng rng(47);
  const double table_z = 0.72;
  PointCloud cloud;
  for (int i = 0; i < 600; ++i)
    cloud.points.push_back(Vec3(rng.uniform(-0.5, 0.5),
                                rng.uniform(-0.5, 0.5),
                                table_z + 0.001 * rng.normal()));
  for (int i = 0; i < 200; ++i)
    cloud.points.push_back(Vec3(rng.uniform(-0.2, 0.2),
                                rng.uniform(-0.2, 0.2),
                                table_z + rng.uniform(0.02, 0.25)));
  RansacParams params;
  params.seed = 99;
  const PlaneModel model = ransac_plane(cloud, params);
  EXPECT_GT(model.plane.normal.dot(Vec3::UnitZ()),
            std::cos(1.0 * tt::kPi / 180.0));
  EXPECT_NEAR(model.plane.d, table_z, 0.005);
  EXPECT_GT(model.inliers.size(), 500u);
  EXPECT_LT(model.inliers.size(), 700u);
}

TEST(Segmentation, RansacDeterministicBySeed) {
  Rng rng(53);
  PointCloud cloud;
  for (int i = 0; i < 300; ++i)
    cloud.points.push_back(Vec3(rng.uniform(-0.4, 0.4),
                                rng.uniform(-0.4, 0.4),
                                0.5 + 0.002 * rng.normal()));
  RansacParams params;
  params.seed = 7;
  const PlaneModel a = ransac_plane(cloud, params);
  const PlaneModel b = ransac_plane(cloud, params);
  EXPECT_EQ(a.plane.normal, b.plane.normal);
  EXPECT_EQ(a.plane.d, b.plane.d);
  EXPECT_EQ(a.inliers, b.inliers);
}

TEST(Segmentation, RansacRejectsVerticalPlanes) {
  Rng rng(59);
  PointCloud wall;
  for (int i = 0; i < 300; ++i)
    wall.points.push_back(
        Vec3(0.5 + 0.001 * rng.normal(), rng.uniform(-0.5, 0.5),
             rng.uniform(0.0, 1.0)));
  RansacParams params;
  params.seed = 3;
  params.iterations = 200;
  EXPECT_THROW(ransac_plane(wall, params), NoPlaneError);
}

TEST(Segmentation, RansacNeedsThreePoints) {
  PointCloud tiny;
  tiny.points = {{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW(ransac_plane(tiny, RansacParams{}), DegenerateInputError);
}

TEST(Segmentation, ExtractAbovePlaneStrictMargin) {
  // Margin and heights exactly representable so the strict > is testable.
  const Plane table{Vec3::UnitZ(), 0.5};
  PointCloud cloud;
  cloud.points = {
      Vec3(0, 0, 0.5),   // on the plane
      Vec3(0, 0, 0.75),  // exactly at margin: excluded (strict)
      Vec3(0, 0, 0.8),   // above margin
      Vec3(0, 0, 0.4),   // below
  };
  const PointCloud out = extract_above_plane(cloud, table, 0.25);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.points[0], cloud.points[2]);
}

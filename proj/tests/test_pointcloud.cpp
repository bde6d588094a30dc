#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fogcast/pointcloud.hpp"

using namespace fogcast;

namespace {

BoundingBox cube(double side) { return {{0, 0, 0}, {side, side, side}}; }

// Integer-grid oracle: on a [0, 2^L) cube, digit l of the path is bit
// (L - 1 - l) of each integer coordinate.
std::string grid_path(int x, int y, int z, int depth) {
  std::string out;
  for (int l = depth - 1; l >= 0; --l) {
    const int child = ((x >> l) & 1) + 2 * ((y >> l) & 1) + 4 * ((z >> l) & 1);
    out.push_back(static_cast<char>('0' + child));
  }
  return out;
}

VoxelSet random_voxels(std::mt19937_64& rng, int depth, int count) {
  std::uniform_int_distribution<int> digit(0, 7);
  VoxelSet v;
  v.depth = depth;
  for (int i = 0; i < count; ++i) {
    std::string p;
    for (int l = 0; l < depth; ++l) p.push_back(static_cast<char>('0' + digit(rng)));
    v.voxels.insert(p);
  }
  return v;
}

}  // namespace

TEST_CASE("octary example paths") {
  const auto box = cube(8);
  std::vector<Point3> pts;
  for (std::string p : {"101", "105", "150", "155"}) pts.push_back(voxel_center(p, box));
  auto o = octree_encode(pts, box, 3);
  auto v = octree_to_voxels(o);
  CHECK(v.voxels == std::set<std::string>{"101", "105", "150", "155"});
  CHECK(std::count(o.levels[0].begin(), o.levels[0].end(), true) == 1);
  CHECK(o.levels[0][1]);
  CHECK(o.levels[1].size() == 8);
  CHECK(o.levels[2].size() == 16);
  CHECK(voxels_to_octree(v, box).levels == o.levels);
}

TEST_CASE("integer grid oracle") {
  std::mt19937_64 rng(1);
  for (int depth : {1, 3, 5}) {
    const int side = 1 << depth;
    std::uniform_int_distribution<int> c(0, side - 1);
    for (int i = 0; i < 200; ++i) {
      int x = c(rng), y = c(rng), z = c(rng);
      Point3 p{x + 0.5, y + 0.25, z + 0.75};
      CHECK(voxel_path(p, cube(side), depth) == grid_path(x, y, z, depth));
    }
  }
}

TEST_CASE("empty and single point octrees") {
  auto empty = octree_encode({}, cube(1), 4);
  REQUIRE(empty.levels.size() == 4);
  CHECK(empty.levels[0] == std::vector<bool>(8, false));
  for (int l = 1; l < 4; ++l) CHECK(empty.levels[l].empty());
  CHECK(octree_to_voxels(empty).voxels.empty());
  CHECK(voxels_to_octree(VoxelSet{4, {}}, cube(1)).levels == empty.levels);

  std::vector<Point3> one{{0.5, 0.5, 0.5}};
  auto o = octree_encode(one, cube(1), 5);
  for (const auto& level : o.levels) {
    CHECK(level.size() == 8);
    CHECK(std::count(level.begin(), level.end(), true) == 1);
  }
  // A point on the splitting plane lands in the high half.
  CHECK(voxel_path({0.5, 0.5, 0.5}, cube(1), 1) == "7");
  CHECK(voxel_path({1, 1, 1}, cube(1), 2) == "77");
  CHECK(voxel_path({0, 0, 0}, cube(1), 2) == "00");
}

TEST_CASE("octree errors") {
  std::vector<Point3> out{{2, 0, 0}};
  try {
    octree_encode(out, cube(1), 3);
    FAIL("expected PointOutOfBounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PointOutOfBounds);
  }

  Octree bad;
  bad.bbox = cube(1);
  bad.depth = 2;
  bad.levels = {std::vector<bool>(8, false), std::vector<bool>(8, false)};
  bad.levels[0][0] = true;
  try {
    octree_to_voxels(bad);
    FAIL("expected InvalidOccupancy");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidOccupancy);
  }
  bad.levels[1] = std::vector<bool>(16, true);
  CHECK_THROWS_AS(octree_to_voxels(bad), Error);

  CHECK_THROWS_AS(voxels_to_octree(VoxelSet{2, {"1"}}, cube(1)), Error);
  CHECK_THROWS_AS(voxels_to_octree(VoxelSet{2, {"18"}}, cube(1)), Error);
  try {
    voxel_xor(VoxelSet{2, {}}, VoxelSet{3, {}});
    FAIL("expected DepthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DepthMismatch);
  }
}

TEST_CASE("octree round trips and level chain") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int depth = 1 + trial % 8;
    auto v = random_voxels(rng, depth, 1 + trial % 40);
    auto o = voxels_to_octree(v, cube(10));
    CHECK_NOTHROW(o.validate());
    for (std::size_t l = 0; l + 1 < o.levels.size(); ++l) {
      CHECK(o.levels[l + 1].size() ==
            8 * static_cast<std::size_t>(std::count(o.levels[l].begin(), o.levels[l].end(), true)));
    }
    CHECK(octree_to_voxels(o) == v);
    CHECK(voxels_to_octree(octree_to_voxels(o), cube(10)).levels == o.levels);
  }
}

TEST_CASE("quantization within half a voxel") {
  std::mt19937_64 rng(3);
  BoundingBox box{{-5, -2, 0}, {5, 6, 3}};
  std::uniform_real_distribution<double> ux(-5, 5), uy(-2, 6), uz(0, 3);
  for (int depth : {4, 6, 8}) {
    const double half[3] = {10.0 / (1 << depth) / 2, 8.0 / (1 << depth) / 2,
                            3.0 / (1 << depth) / 2};
    for (int i = 0; i < 300; ++i) {
      Point3 p{ux(rng), uy(rng), uz(rng)};
      auto c = voxel_center(voxel_path(p, box, depth), box);
      CHECK(std::abs(p.x - c.x) <= half[0] + 1e-12);
      CHECK(std::abs(p.y - c.y) <= half[1] + 1e-12);
      CHECK(std::abs(p.z - c.z) <= half[2] + 1e-12);
    }
  }
}

TEST_CASE("voxel xor and differential coding") {
  VoxelSet a{3, {"101", "105"}};
  VoxelSet b{3, {"105", "150"}};
  CHECK(voxel_xor(a, b).voxels == std::set<std::string>{"101", "150"});
  CHECK(voxel_xor(a, a).voxels.empty());
  CHECK(voxel_xor(a, VoxelSet{3, {}}) == a);
  CHECK(diff_encode(a, a).voxels.empty());
  CHECK(diff_encode(a, VoxelSet{3, {}}) == a);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    auto obs = random_voxels(rng, 4, i % 30);
    auto ref = random_voxels(rng, 4, (i * 7) % 30);
    auto c = random_voxels(rng, 4, 5);
    CHECK(diff_apply(ref, diff_encode(obs, ref)) == obs);
    CHECK(voxel_xor(voxel_xor(obs, ref), obs) == ref);
    CHECK(voxel_xor(obs, ref) == voxel_xor(ref, obs));
    CHECK(voxel_xor(voxel_xor(obs, ref), c) == voxel_xor(obs, voxel_xor(ref, c)));
  }
}

TEST_CASE("bloom membership") {
  std::mt19937_64 rng(5);
  auto v = random_voxels(rng, 6, 500);
  auto d = bloom_build(v, 8192, 5, 9);
  for (const auto& p : v.voxels) CHECK(bloom_query(d, p));
  auto empty = bloom_empty(128, 3);
  CHECK_FALSE(bloom_query(empty, "123"));
  CHECK_THROWS_AS(bloom_empty(0, 3), Error);
  CHECK_THROWS_AS(bloom_empty(8, 0), Error);
  CHECK(bloom_positions(d, "1").size() == 5);
}

TEST_CASE("bloom false positive rate near the formula") {
  const std::uint32_t m = 9585;
  const std::uint32_t k = 7;
  const int n = 1000;
  auto d = bloom_empty(m, k, 0);
  for (int i = 0; i < n; ++i) bloom_insert(d, "in" + std::to_string(i));
  int hits = 0;
  const int probes = 100000;
  for (int i = 0; i < probes; ++i) hits += bloom_query(d, "out" + std::to_string(i));
  const double expected = std::pow(1 - std::exp(-double(k) * n / m), k);
  const double measured = double(hits) / probes;
  CHECK(expected == doctest::Approx(0.0082).epsilon(0.02));
  CHECK(measured >= expected * 0.5);
  CHECK(measured <= expected * 1.5);
}

TEST_CASE("bloom compare") {
  VoxelSet x{3, {"101", "105"}};
  VoxelSet xy{3, {"101", "105", "150", "777"}};
  auto a = bloom_build(x, 256, 3);
  auto b = bloom_build(xy, 256, 3);
  auto c = bloom_compare(a, b);
  CHECK(c.popcount_b >= c.popcount_a);
  CHECK(c.b_covers_a);
  auto same = bloom_compare(a, a);
  CHECK(same.popcount_a == same.popcount_b);
  CHECK(same.a_covers_b);
  CHECK(same.b_covers_a);
  try {
    bloom_compare(a, bloom_build(x, 256, 4));
    FAIL("expected ParameterMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParameterMismatch);
  }

  std::mt19937_64 rng(6);
  int related = 0;
  for (int i = 0; i < 100; ++i) {
    VoxelSet p{8, {}};
    VoxelSet q{8, {}};
    for (int j = 0; j < 50; ++j) {
      p.voxels.insert("0" + random_voxels(rng, 7, 1).voxels.begin()->substr());
      q.voxels.insert("1" + random_voxels(rng, 7, 1).voxels.begin()->substr());
    }
    auto r = bloom_compare(bloom_build(p, 4096, 7), bloom_build(q, 4096, 7));
    related += r.a_covers_b || r.b_covers_a;
  }
  CHECK(related == 0);
}

TEST_CASE("binary formats round trip") {
  std::mt19937_64 rng(7);
  auto v = random_voxels(rng, 5, 60);
  BoundingBox box{{-1.5, 2, 3}, {4, 8.25, 9}};
  auto o = voxels_to_octree(v, box);
  std::stringstream buf;
  write_octree(buf, o);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "OCT1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 5);
  std::size_t expected = 4 + 1 + 48;
  for (const auto& l : o.levels) expected += (l.size() + 7) / 8;
  CHECK(bytes.size() == expected);
  auto back = read_octree(buf);
  CHECK(back.levels == o.levels);
  CHECK(back.bbox.min.x == -1.5);
  CHECK(back.bbox.max.y == 8.25);

  // Level 1 of a single point in octant 1 is 0b01000000.
  std::stringstream one;
  write_octree(one, voxels_to_octree(VoxelSet{1, {"1"}}, box));
  CHECK(static_cast<unsigned char>(one.str()[53]) == 0x40);

  auto d = bloom_build(v, 100, 4, 77);
  std::stringstream bb;
  write_bloom(bb, d);
  CHECK(bb.str().size() == 4 + 4 + 4 + 8 + 13);
  auto d2 = read_bloom(bb);
  CHECK(d2.bits == d.bits);
  CHECK(d2.seed == 77);

  std::stringstream junk("OCT2");
  CHECK_THROWS_AS(read_octree(junk), Error);
  std::stringstream truncated(bytes.substr(0, 20));
  CHECK_THROWS_AS(read_octree(truncated), Error);
}

TEST_CASE("point text format") {
  std::stringstream in("# header\n1 2 3\n\n4.5 -1 0\n");
  auto pts = read_points(in);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].x == 4.5);
  std::stringstream bad("1 2\n");
  CHECK_THROWS_AS(read_points(bad), Error);
  std::stringstream out;
  write_points(out, pts);
  auto again = read_points(out);
  CHECK(again[0].z == 3);
}

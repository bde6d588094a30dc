#pragma once

// Octree occupancy coding of point clouds, voxel-level XOR and differential
// coding, Bloom digests, and the OCT1 / BLM1 binary formats.
//
// Octant index of a child cell is x_half + 2 * y_half + 4 * z_half where the
// high half (coordinate >= midpoint) is 1. A voxel is addressed by its octary
// path from the root, one digit per level.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fogcast/error.hpp"

namespace fogcast {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct BoundingBox {
  Point3 min;
  Point3 max;

  // Throws PointOutOfBounds unless min < max on every axis.
  void validate() const;
  bool contains(const Point3& p) const;
};

struct Octree {
  BoundingBox bbox;
  int depth = 1;
  // levels[0] has 8 bits; levels[i + 1] has 8 * popcount(levels[i]) bits.
  std::vector<std::vector<bool>> levels;

  // Throws InvalidOccupancy on a wrong level length or an occupied internal
  // cell without occupied children.
  void validate() const;
  std::size_t leaf_count() const;
};

struct VoxelSet {
  int depth = 1;
  std::set<std::string> voxels;

  friend bool operator==(const VoxelSet&, const VoxelSet&) = default;
};

// Throws PointOutOfBounds for points outside bbox.
Octree octree_encode(std::span<const Point3> points, const BoundingBox& bbox, int depth);

VoxelSet octree_to_voxels(const Octree& octree);
// Throws InvalidOccupancy for malformed paths.
Octree voxels_to_octree(const VoxelSet& voxels, const BoundingBox& bbox);

std::string voxel_path(const Point3& p, const BoundingBox& bbox, int depth);
BoundingBox voxel_cell(const std::string& path, const BoundingBox& bbox);
Point3 voxel_center(const std::string& path, const BoundingBox& bbox);
std::vector<Point3> voxel_centers(const Octree& octree);

// Symmetric difference. Throws DepthMismatch when depths differ.
VoxelSet voxel_xor(const VoxelSet& a, const VoxelSet& b);
// Voxels that flip between reference and observed.
VoxelSet diff_encode(const VoxelSet& observed, const VoxelSet& reference);
VoxelSet diff_apply(const VoxelSet& reference, const VoxelSet& diff);

struct BloomDigest {
  std::uint32_t m = 0;
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  std::vector<bool> bits;

  std::size_t popcount() const;
};

inline constexpr std::uint32_t kDefaultBloomBits = 16384;
inline constexpr std::uint32_t kDefaultBloomHashes = 7;
inline constexpr int kDefaultOctreeDepth = 8;

// Throws ParameterMismatch when m == 0 or k == 0.
BloomDigest bloom_empty(std::uint32_t m, std::uint32_t k, std::uint64_t seed = 0);
void bloom_insert(BloomDigest& digest, const std::string& path);
BloomDigest bloom_build(const VoxelSet& voxels, std::uint32_t m = kDefaultBloomBits,
                        std::uint32_t k = kDefaultBloomHashes, std::uint64_t seed = 0);
bool bloom_query(const BloomDigest& digest, const std::string& path);
// Bit positions set for a path, in hash order.
std::vector<std::uint32_t> bloom_positions(const BloomDigest& digest, const std::string& path);

// Advisory only: a set of bits covering another's suggests, but never proves,
// that the first cloud holds the second's content.
struct BloomComparison {
  std::size_t popcount_a = 0;
  std::size_t popcount_b = 0;
  bool a_covers_b = false;
  bool b_covers_a = false;
};
// Throws ParameterMismatch unless m, k and seed agree.
BloomComparison bloom_compare(const BloomDigest& a, const BloomDigest& b);

void write_octree(std::ostream& out, const Octree& octree);
Octree read_octree(std::istream& in);
void write_bloom(std::ostream& out, const BloomDigest& digest);
BloomDigest read_bloom(std::istream& in);
// One "x y z" per line; blank lines and lines starting with '#' are skipped.
std::vector<Point3> read_points(std::istream& in);
void write_points(std::ostream& out, std::span<const Point3> points);

}  // namespace fogcast

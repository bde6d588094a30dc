#include "fogcast/pointcloud.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace fogcast {

namespace {

void check_depth(int depth) {
  if (depth < 1 || depth > 21) {
    throw Error(ErrorCode::DepthMismatch, "octree depth must be in 1..21, got " +
                                              std::to_string(depth));
  }
}

void check_same_depth(const VoxelSet& a, const VoxelSet& b) {
  if (a.depth != b.depth) {
    throw Error(ErrorCode::DepthMismatch, "voxel depths differ: " + std::to_string(a.depth) +
                                              " vs " + std::to_string(b.depth));
  }
}

std::size_t count_ones(const std::vector<bool>& bits) {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf{};
  std::memcpy(buf.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<char, sizeof(T)> buf{};
  if (!in.read(buf.data(), buf.size())) {
    throw Error(ErrorCode::ParseError, std::string("truncated ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  return value;
}

void put_bits(std::ostream& out, const std::vector<bool>& bits) {
  std::vector<char> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<bool> get_bits(std::istream& in, std::size_t count, const char* what) {
  std::vector<char> bytes((count + 7) / 8);
  if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw Error(ErrorCode::ParseError, std::string("truncated ") + what);
  }
  std::vector<bool> bits(count);
  for (std::size_t i = 0; i < count; ++i) {
    bits[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (7 - i % 8)) & 1U;
  }
  return bits;
}

void expect_magic(std::istream& in, const char* magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw Error(ErrorCode::ParseError, std::string("missing ") + magic + " header");
  }
}

}  // namespace

void BoundingBox::validate() const {
  if (!(min.x < max.x && min.y < max.y && min.z < max.z)) {
    throw Error(ErrorCode::PointOutOfBounds, "bounding box must satisfy min < max");
  }
}

bool BoundingBox::contains(const Point3& p) const {
  return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
         p.z <= max.z;
}

void Octree::validate() const {
  check_depth(depth);
  if (levels.size() != static_cast<std::size_t>(depth)) {
    throw Error(ErrorCode::InvalidOccupancy, "expected " + std::to_string(depth) +
                                                 " levels, got " +
                                                 std::to_string(levels.size()));
  }
  std::size_t expected = 8;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].size() != expected) {
      throw Error(ErrorCode::InvalidOccupancy,
                  "level " + std::to_string(l + 1) + " has " +
                      std::to_string(levels[l].size()) + " bits, expected " +
                      std::to_string(expected));
    }
    if (l + 1 < levels.size()) {
      const auto& children = levels[l + 1];
      if (children.size() == 8 * count_ones(levels[l])) {
        for (std::size_t c = 0; c < children.size(); c += 8) {
          if (std::none_of(children.begin() + static_cast<std::ptrdiff_t>(c),
                           children.begin() + static_cast<std::ptrdiff_t>(c + 8),
                           [](bool b) { return b; })) {
            throw Error(ErrorCode::InvalidOccupancy,
                        "occupied cell at level " + std::to_string(l + 1) +
                            " has no occupied child");
          }
        }
      }
    }
    expected = 8 * count_ones(levels[l]);
  }
}

std::size_t Octree::leaf_count() const {
  return levels.empty() ? 0 : count_ones(levels.back());
}

std::string voxel_path(const Point3& p, const BoundingBox& bbox, int depth) {
  if (!bbox.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ", " << p.z << ") outside bounding box";
    throw Error(ErrorCode::PointOutOfBounds, msg.str());
  }
  Point3 lo = bbox.min;
  Point3 hi = bbox.max;
  std::string path;
  path.reserve(static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l) {
    int octant = 0;
    double* los[3] = {&lo.x, &lo.y, &lo.z};
    double* his[3] = {&hi.x, &hi.y, &hi.z};
    const double coords[3] = {p.x, p.y, p.z};
    for (int axis = 0; axis < 3; ++axis) {
      const double mid = (*los[axis] + *his[axis]) / 2.0;
      if (coords[axis] >= mid) {
        octant |= 1 << axis;
        *los[axis] = mid;
      } else {
        *his[axis] = mid;
      }
    }
    path.push_back(static_cast<char>('0' + octant));
  }
  return path;
}

BoundingBox voxel_cell(const std::string& path, const BoundingBox& bbox) {
  BoundingBox cell = bbox;
  for (char c : path) {
    const int octant = c - '0';
    double* los[3] = {&cell.min.x, &cell.min.y, &cell.min.z};
    double* his[3] = {&cell.max.x, &cell.max.y, &cell.max.z};
    for (int axis = 0; axis < 3; ++axis) {
      const double mid = (*los[axis] + *his[axis]) / 2.0;
      if (octant >> axis & 1) {
        *los[axis] = mid;
      } else {
        *his[axis] = mid;
      }
    }
  }
  return cell;
}

Point3 voxel_center(const std::string& path, const BoundingBox& bbox) {
  const BoundingBox c = voxel_cell(path, bbox);
  return {(c.min.x + c.max.x) / 2.0, (c.min.y + c.max.y) / 2.0, (c.min.z + c.max.z) / 2.0};
}

Octree octree_encode(std::span<const Point3> points, const BoundingBox& bbox, int depth) {
  bbox.validate();
  check_depth(depth);
  VoxelSet v;
  v.depth = depth;
  for (const auto& p : points) v.voxels.insert(voxel_path(p, bbox, depth));
  return voxels_to_octree(v, bbox);
}

Octree voxels_to_octree(const VoxelSet& voxels, const BoundingBox& bbox) {
  check_depth(voxels.depth);
  const auto depth = static_cast<std::size_t>(voxels.depth);
  for (const auto& path : voxels.voxels) {
    if (path.size() != depth ||
        !std::all_of(path.begin(), path.end(), [](char c) { return c >= '0' && c <= '7'; })) {
      throw Error(ErrorCode::InvalidOccupancy, "malformed voxel path '" + path + "'");
    }
  }
  Octree o;
  o.bbox = bbox;
  o.depth = voxels.depth;
  // Occupied prefixes per level in traversal (lexicographic) order.
  std::vector<std::string> parents{""};
  for (std::size_t l = 0; l < depth; ++l) {
    std::vector<bool> bits;
    std::vector<std::string> next;
    bits.reserve(parents.size() * 8);
    for (const auto& parent : parents) {
      for (char d = '0'; d <= '7'; ++d) {
        const std::string child = parent + d;
        auto it = voxels.voxels.lower_bound(child);
        const bool occupied = it != voxels.voxels.end() && it->compare(0, child.size(), child) == 0;
        bits.push_back(occupied);
        if (occupied) next.push_back(child);
      }
    }
    o.levels.push_back(std::move(bits));
    parents = std::move(next);
  }
  return o;
}

VoxelSet octree_to_voxels(const Octree& octree) {
  octree.validate();
  VoxelSet v;
  v.depth = octree.depth;
  std::vector<std::string> parents{""};
  for (const auto& level : octree.levels) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i]) next.push_back(parents[i / 8] + static_cast<char>('0' + i % 8));
    }
    parents = std::move(next);
  }
  v.voxels.insert(parents.begin(), parents.end());
  return v;
}

std::vector<Point3> voxel_centers(const Octree& octree) {
  std::vector<Point3> out;
  for (const auto& path : octree_to_voxels(octree).voxels) {
    out.push_back(voxel_center(path, octree.bbox));
  }
  return out;
}

VoxelSet voxel_xor(const VoxelSet& a, const VoxelSet& b) {
  check_same_depth(a, b);
  VoxelSet out;
  out.depth = a.depth;
  std::set_symmetric_difference(a.voxels.begin(), a.voxels.end(), b.voxels.begin(),
                                b.voxels.end(), std::inserter(out.voxels, out.voxels.end()));
  return out;
}

VoxelSet diff_encode(const VoxelSet& observed, const VoxelSet& reference) {
  return voxel_xor(observed, reference);
}

VoxelSet diff_apply(const VoxelSet& reference, const VoxelSet& diff) {
  return voxel_xor(reference, diff);
}

std::size_t BloomDigest::popcount() const { return count_ones(bits); }

BloomDigest bloom_empty(std::uint32_t m, std::uint32_t k, std::uint64_t seed) {
  if (m == 0 || k == 0) {
    throw Error(ErrorCode::ParameterMismatch, "bloom filter needs m > 0 and k > 0");
  }
  BloomDigest d;
  d.m = m;
  d.k = k;
  d.seed = seed;
  d.bits.assign(m, false);
  return d;
}

std::vector<std::uint32_t> bloom_positions(const BloomDigest& digest, const std::string& path) {
  const std::uint64_t h1 = splitmix64(fnv1a(path) ^ digest.seed);
  const std::uint64_t h2 = splitmix64(h1) | 1U;
  std::vector<std::uint32_t> out;
  out.reserve(digest.k);
  for (std::uint32_t i = 0; i < digest.k; ++i) {
    out.push_back(static_cast<std::uint32_t>((h1 + i * h2) % digest.m));
  }
  return out;
}

void bloom_insert(BloomDigest& digest, const std::string& path) {
  for (auto pos : bloom_positions(digest, path)) digest.bits[pos] = true;
}

BloomDigest bloom_build(const VoxelSet& voxels, std::uint32_t m, std::uint32_t k,
                        std::uint64_t seed) {
  BloomDigest d = bloom_empty(m, k, seed);
  for (const auto& path : voxels.voxels) bloom_insert(d, path);
  return d;
}

bool bloom_query(const BloomDigest& digest, const std::string& path) {
  const auto positions = bloom_positions(digest, path);
  return std::all_of(positions.begin(), positions.end(),
                     [&](std::uint32_t p) { return digest.bits[p]; });
}

BloomComparison bloom_compare(const BloomDigest& a, const BloomDigest& b) {
  if (a.m != b.m || a.k != b.k || a.seed != b.seed) {
    throw Error(ErrorCode::ParameterMismatch, "bloom digests use different parameters");
  }
  BloomComparison c;
  c.popcount_a = a.popcount();
  c.popcount_b = b.popcount();
  c.a_covers_b = true;
  c.b_covers_a = true;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    if (b.bits[i] && !a.bits[i]) c.a_covers_b = false;
    if (a.bits[i] && !b.bits[i]) c.b_covers_a = false;
  }
  return c;
}

void write_octree(std::ostream& out, const Octree& octree) {
  octree.validate();
  out.write("OCT1", 4);
  out.put(static_cast<char>(octree.depth));
  for (double v : {octree.bbox.min.x, octree.bbox.min.y, octree.bbox.min.z, octree.bbox.max.x,
                   octree.bbox.max.y, octree.bbox.max.z}) {
    put_le(out, v);
  }
  for (const auto& level : octree.levels) put_bits(out, level);
  if (!out) throw Error(ErrorCode::IoError, "failed to write octree");
}

Octree read_octree(std::istream& in) {
  expect_magic(in, "OCT1");
  const int depth = in.get();
  if (depth == std::char_traits<char>::eof()) throw Error(ErrorCode::ParseError, "truncated depth");
  Octree o;
  o.depth = depth;
  check_depth(depth);
  o.bbox.min.x = get_le<double>(in, "bounding box");
  o.bbox.min.y = get_le<double>(in, "bounding box");
  o.bbox.min.z = get_le<double>(in, "bounding box");
  o.bbox.max.x = get_le<double>(in, "bounding box");
  o.bbox.max.y = get_le<double>(in, "bounding box");
  o.bbox.max.z = get_le<double>(in, "bounding box");
  std::size_t count = 8;
  for (int l = 0; l < depth; ++l) {
    o.levels.push_back(get_bits(in, count, "octree level"));
    count = 8 * count_ones(o.levels.back());
  }
  o.validate();
  return o;
}

void write_bloom(std::ostream& out, const BloomDigest& digest) {
  out.write("BLM1", 4);
  put_le(out, digest.m);
  put_le(out, digest.k);
  put_le(out, digest.seed);
  put_bits(out, digest.bits);
  if (!out) throw Error(ErrorCode::IoError, "failed to write bloom digest");
}

BloomDigest read_bloom(std::istream& in) {
  expect_magic(in, "BLM1");
  const auto m = get_le<std::uint32_t>(in, "bloom header");
  const auto k = get_le<std::uint32_t>(in, "bloom header");
  const auto seed = get_le<std::uint64_t>(in, "bloom header");
  BloomDigest d = bloom_empty(m, k, seed);
  d.bits = get_bits(in, m, "bloom bits");
  return d;
}

std::vector<Point3> read_points(std::istream& in) {
  std::vector<Point3> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    Point3 p;
    if (!(row >> p.x >> p.y >> p.z)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) +
                                             ": expected three coordinates");
    }
    out.push_back(p);
  }
  return out;
}

void write_points(std::ostream& out, std::span<const Point3> points) {
  out.precision(17);
  for (const auto& p : points) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

}  // namespace fogcast

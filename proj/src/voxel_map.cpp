#include <explore/voxel_map.hpp>

#include <array>
#include <cstring>
#include <fstream>

namespace explore {

namespace {

constexpr char kBlockMagic[8] = {'S', 'E', 'E', 'R', 'B', 'L', 'K', '1'};

void put_u32(std::ostream& os, uint32_t v) {
  std::array<unsigned char, 4> b{static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                                 static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  if (!is) throw ConfigError("truncated block header");
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

}  // namespace

void write_block(const std::string& path, const OccupancyBlock& block) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeFailure("cannot write block file " + path);
  os.write(kBlockMagic, sizeof(kBlockMagic));
  for (int a = 0; a < 3; ++a) put_u32(os, uint32_t(block.dims[a]));
  os.write(reinterpret_cast<const char*>(block.values.data()), std::streamsize(block.values.size()));
  if (!os) throw RuntimeFailure("short write to " + path);
}

OccupancyBlock read_block(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open block file " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kBlockMagic, 8) != 0) throw ConfigError("bad block magic in " + path);
  Vec3i dims;
  for (int a = 0; a < 3; ++a) dims[a] = int(get_u32(is));
  if ((dims.array() <= 0).any() || dims.cast<long>().prod() > (1L << 28)) throw ConfigError("bad block dims in " + path);
  OccupancyBlock block(dims);
  is.read(reinterpret_cast<char*>(block.values.data()), std::streamsize(block.values.size()));
  if (is.gcount() != std::streamsize(block.values.size())) throw ConfigError("truncated block data in " + path);
  for (int8_t v : block.values)
    if (v < -1 || v > 1) throw ConfigError("non-trinary value in " + path);
  return block;
}

VoxelMap::VoxelMap(const Vec3& origin, double resolution, const Vec3i& dims, const MapParams& params)
    : origin_(origin), resolution_(resolution), dims_(dims), params_(params) {
  if (resolution <= 0 || (dims.array() <= 0).any()) throw ConfigError("invalid map geometry");
  if (!(params.clamp_min < params.free_threshold && params.free_threshold < params.occ_threshold &&
        params.occ_threshold < params.clamp_max))
    throw ConfigError("map thresholds must satisfy clamp_min < free < occ < clamp_max");
  logodds_.assign(size_t(dims.x()) * dims.y() * dims.z(), 0.0f);
  scan_mark_.assign(logodds_.size(), 0);
}

void VoxelMap::set_logodds(const Vec3i& v, double l) {
  const double lo = params_.clamp_min + params_.clamp_eps;
  const double hi = params_.clamp_max - params_.clamp_eps;
  logodds_[linear(v)] = float(std::clamp(l, lo, hi));
}

Aabb VoxelMap::integrate_scan(const Vec3& sensor, std::span<const RayEndpoint> rays) {
  if (!in_map(sensor)) throw RuntimeFailure("sensor outside map");
  // Two marks per scan: 2s = missed this scan, 2s+1 = hit this scan.
  if (scan_id_ >= 0x7ffffffe) {
    std::fill(scan_mark_.begin(), scan_mark_.end(), 0);
    scan_id_ = 0;
  }
  ++scan_id_;
  const uint32_t miss_mark = 2 * scan_id_;
  const uint32_t hit_mark = miss_mark + 1;

  Aabb changed;
  auto update = [&](const Vec3i& v, double delta) {
    const size_t i = linear(v);
    const float before = logodds_[i];
    set_logodds(v, double(before) + delta);
    if (logodds_[i] != before) changed.extend(v);
  };

  for (const auto& r : rays) {
    if (!r.hit) continue;
    const Vec3i v = to_index(r.end);
    if (!in_map(v)) continue;
    const size_t i = linear(v);
    if (scan_mark_[i] == hit_mark) continue;
    scan_mark_[i] = hit_mark;
    update(v, params_.hit_logodds);
  }

  for (const auto& r : rays) {
    const Vec3i end_voxel = to_index(r.end);
    walk_ray(*this, sensor, r.end, [&](const Vec3i& v) {
      if (r.hit && v == end_voxel) return false;
      const size_t i = linear(v);
      if (scan_mark_[i] >= miss_mark) return true;
      scan_mark_[i] = miss_mark;
      update(v, params_.miss_logodds);
      return true;
    });
  }
  return changed;
}

std::vector<int8_t> VoxelMap::trinary_grid() const {
  std::vector<int8_t> out(logodds_.size());
  for (size_t i = 0; i < logodds_.size(); ++i) out[i] = classify(logodds_[i]);
  return out;
}

Vec3i VoxelMap::block_origin(const Vec3& center, const Vec3i& dims) const {
  const Vec3i c = to_index(center);
  return Vec3i(c.x() - dims.x() / 2, c.y() - dims.y() / 2, 0);
}

OccupancyBlock VoxelMap::extract_block(const Vec3& center, const Vec3i& dims) const {
  OccupancyBlock block(dims);
  block.origin = block_origin(center, dims);
  for (int z = 0; z < dims.z(); ++z)
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Vec3i v = block.origin + Vec3i(x, y, z);
        if (in_map(v)) block.at(x, y, z) = trinary(v);
      }
  return block;
}

std::vector<Vec3i> traverse(const VoxelMap& map, const Vec3& start, const Vec3& end) {
  std::vector<Vec3i> out;
  walk_ray(map, start, end, [&](const Vec3i& v) {
    out.push_back(v);
    return true;
  });
  return out;
}

}  // namespace explore

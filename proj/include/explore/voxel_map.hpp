#pragma once

#include <explore/common.hpp>

#include <span>
#include <string>
#include <vector>

namespace explore {

struct MapParams {
  double hit_logodds = 0.85;
  double miss_logodds = -0.4;
  double clamp_min = -2.0;
  double clamp_max = 3.5;
  double occ_threshold = 0.5;
  double free_threshold = -0.5;
  // stored values stay this far inside the clamp interval
  double clamp_eps = 1e-4;
};

/// A depth-camera ray endpoint; `hit` marks a surface return, otherwise the
/// point is the max-range end of a free ray.
struct RayEndpoint {
  Vec3 end{Vec3::Zero()};
  bool hit = false;
};

/// Trinary local region exchanged with the occupancy predictors. `origin` is
/// the map voxel index of element (0,0,0); it is not serialized.
struct OccupancyBlock {
  Vec3i dims{Vec3i::Zero()};
  Vec3i origin{Vec3i::Zero()};
  std::vector<int8_t> values;

  OccupancyBlock() = default;
  OccupancyBlock(const Vec3i& d, int8_t fill = kUnknown) : dims(d), values(size_t(d.prod()), fill) {}

  size_t index(int x, int y, int z) const { return size_t(x) + size_t(dims.x()) * (size_t(y) + size_t(dims.y()) * size_t(z)); }
  int8_t at(int x, int y, int z) const { return values[index(x, y, z)]; }
  int8_t& at(int x, int y, int z) { return values[index(x, y, z)]; }
  size_t size() const { return values.size(); }
  bool operator==(const OccupancyBlock& o) const { return dims == o.dims && values == o.values; }
};

/// Default predictor block: 8 m x 8 m x 2.4 m at 0.1 m.
inline const Vec3i kBlockDims{80, 80, 24};

void write_block(const std::string& path, const OccupancyBlock& block);
OccupancyBlock read_block(const std::string& path);

/// Clamped log-odds occupancy grid.
class VoxelMap {
 public:
  VoxelMap(const Vec3& origin, double resolution, const Vec3i& dims, const MapParams& params = {});

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vec3i& dims() const { return dims_; }
  const MapParams& params() const { return params_; }
  size_t voxel_count() const { return logodds_.size(); }

  bool in_map(const Vec3i& v) const {
    return v.x() >= 0 && v.y() >= 0 && v.z() >= 0 && v.x() < dims_.x() && v.y() < dims_.y() && v.z() < dims_.z();
  }
  bool in_map(const Vec3& p) const { return in_map(to_index(p)); }

  Vec3i to_index(const Vec3& p) const {
    Vec3 u = (p - origin_) / resolution_;
    return Vec3i(int(std::floor(u.x())), int(std::floor(u.y())), int(std::floor(u.z())));
  }
  Vec3 center(const Vec3i& v) const { return origin_ + (v.cast<double>().array() + 0.5).matrix() * resolution_; }
  size_t linear(const Vec3i& v) const {
    return size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z()));
  }
  Vec3i unlinear(size_t i) const {
    int x = int(i % size_t(dims_.x()));
    size_t r = i / size_t(dims_.x());
    return Vec3i(x, int(r % size_t(dims_.y())), int(r / size_t(dims_.y())));
  }

  float logodds(const Vec3i& v) const { return logodds_[linear(v)]; }
  /// Sets a raw log-odds value, clamped into the valid interval.
  void set_logodds(const Vec3i& v, double l);

  int8_t trinary(const Vec3i& v) const { return classify(logodds_[linear(v)]); }
  int8_t trinary_at(size_t linear_index) const { return classify(logodds_[linear_index]); }
  int8_t trinary_or_unknown(const Vec3i& v) const { return in_map(v) ? trinary(v) : int8_t(kUnknown); }
  bool is_free(const Vec3i& v) const { return in_map(v) && trinary(v) == kFree; }
  bool is_occupied(const Vec3i& v) const { return in_map(v) && trinary(v) == kOccupied; }
  bool is_unknown(const Vec3i& v) const { return in_map(v) && trinary(v) == kUnknown; }

  int8_t classify(float l) const {
    if (l >= params_.occ_threshold) return kOccupied;
    if (l <= params_.free_threshold) return kFree;
    return kUnknown;
  }

  /// Integrates one depth scan: every voxel along a ray gets one miss update
  /// and hit endpoints one hit update, at most one update per voxel per scan
  /// (hits win). Returns the tight box of voxels whose value changed.
  Aabb integrate_scan(const Vec3& sensor, std::span<const RayEndpoint> rays);

  /// Trinary export of the whole grid in x-fastest order.
  std::vector<int8_t> trinary_grid() const;

  /// Trinary block centered horizontally at `center`, bottom at the map's
  /// z origin. Voxels outside the map are unknown.
  OccupancyBlock extract_block(const Vec3& center, const Vec3i& dims = kBlockDims) const;
  /// Map voxel index that becomes element (0,0,0) of extract_block.
  Vec3i block_origin(const Vec3& center, const Vec3i& dims = kBlockDims) const;

 private:
  Vec3 origin_;
  double resolution_;
  Vec3i dims_;
  MapParams params_;
  std::vector<float> logodds_;
  std::vector<uint32_t> scan_mark_;
  uint32_t scan_id_ = 0;
};

/// Voxel walk between two points (metric coordinates of `map`): every voxel
/// the segment passes through, in order, stopping at `end` or when leaving
/// the map. `visit(const Vec3i&)` returns false to stop early.
template <class Visit>
void walk_ray(const VoxelMap& map, const Vec3& start, const Vec3& end, Visit&& visit) {
  const double res = map.resolution();
  const Vec3 u0 = (start - map.origin()) / res;
  const Vec3 u1 = (end - map.origin()) / res;
  Vec3i cur(int(std::floor(u0.x())), int(std::floor(u0.y())), int(std::floor(u0.z())));
  const Vec3i last(int(std::floor(u1.x())), int(std::floor(u1.y())), int(std::floor(u1.z())));
  if (!map.in_map(cur)) return;
  if (!visit(static_cast<const Vec3i&>(cur))) return;

  const Vec3 d = u1 - u0;
  Vec3i step;
  Vec3 t_max, t_delta;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0) {
      step[a] = 1;
      t_delta[a] = 1.0 / d[a];
      t_max[a] = (cur[a] + 1 - u0[a]) / d[a];
    } else if (d[a] < 0) {
      step[a] = -1;
      t_delta[a] = -1.0 / d[a];
      t_max[a] = (u0[a] - cur[a]) / -d[a];
    } else {
      step[a] = 0;
      t_delta[a] = inf;
      t_max[a] = inf;
    }
  }
  const int max_steps = (last - cur).cwiseAbs().sum();
  for (int n = 0; n < max_steps; ++n) {
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > 1.0) break;
    cur[a] += step[a];
    t_max[a] += t_delta[a];
    if (!map.in_map(cur)) return;
    if (!visit(static_cast<const Vec3i&>(cur))) return;
  }
}

/// Ordered voxel sequence of walk_ray.
std::vector<Vec3i> traverse(const VoxelMap& map, const Vec3& start, const Vec3& end);

}  // namespace explore

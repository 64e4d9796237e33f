#pragma once

#include <explore/common.hpp>
#include <explore/voxel_map.hpp>

#include <optional>
#include <vector>

namespace explore {

struct SafetyParams {
  double robot_radius = 0.3;
  double margin = 0.04;
  // flight band: voxel layers whose centers lie in [z_min, z_max]
  double z_min = 1.0;
  double z_max = 1.1;

  double clearance() const { return robot_radius + margin; }
};

/// Per-voxel "safe node" flags inside the flight band: known free, and every
/// voxel cube within `clearance()` of the center is known free.
class SafetyGrid {
 public:
  /// Flags are computed for the whole map on construction.
  SafetyGrid(const VoxelMap& map, const SafetyParams& params = {});

  /// Recomputes flags for voxels whose neighborhood touches `changed`.
  void update(const VoxelMap& map, const Aabb& changed);
  void rebuild(const VoxelMap& map);

  bool safe(const Vec3i& v) const;
  bool in_band(int z) const { return z >= z_lo_ && z <= z_hi_; }
  int z_lo() const { return z_lo_; }
  int z_hi() const { return z_hi_; }
  const SafetyParams& params() const { return params_; }
  /// Safe voxel nearest to `p` (Euclidean between centers) within `radius` metres.
  std::optional<Vec3i> nearest_safe(const VoxelMap& map, const Vec3& p, double radius) const;

 private:
  bool compute(const VoxelMap& map, const Vec3i& v) const;

  SafetyParams params_;
  Vec3i dims_;
  int z_lo_ = 0, z_hi_ = -1, reach_ = 0;
  std::vector<Vec3i> offsets_;
  std::vector<uint8_t> safe_;
};

/// Distance from `p` to the nearest voxel cube that is not known free
/// (voxels outside the map count as not free), capped at `cap`.
double map_clearance(const VoxelMap& map, const Vec3& p, double cap);

/// True if every point of segment a-b has map_clearance >= r (sampled at res/4).
bool segment_clear(const VoxelMap& map, const Vec3& a, const Vec3& b, double r);

/// Shortest-path lengths (m) over safe voxels with 26-connectivity.
class DistanceField {
 public:
  DistanceField() = default;
  /// Dijkstra from `source`, which is admitted even when it is not safe.
  DistanceField(const VoxelMap& map, const SafetyGrid& safety, const Vec3i& source);

  double at(const Vec3i& v) const;
  bool reachable(const Vec3i& v) const { return std::isfinite(at(v)); }
  /// Voxel path from the source to `v` (empty if unreachable).
  std::vector<Vec3i> path_to(const Vec3i& v) const;

 private:
  Vec3i dims_{Vec3i::Zero()};
  std::vector<double> dist_;
  std::vector<int> parent_;
};

/// A* over safe voxels; empty result when no path exists. `start` is admitted
/// even when unsafe.
std::vector<Vec3i> astar(const VoxelMap& map, const SafetyGrid& safety, const Vec3i& start, const Vec3i& goal);

/// Metric length of a voxel path through voxel centers.
double path_length(const VoxelMap& map, const std::vector<Vec3i>& path);

}  // namespace explore

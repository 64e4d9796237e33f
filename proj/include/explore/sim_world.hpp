#pragma once

#include <explore/common.hpp>
#include <explore/voxel_map.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace explore {

struct Box {
  Vec3 min{Vec3::Zero()};
  Vec3 max{Vec3::Zero()};
  bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
  double distance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(Vec3::Zero());
    return d.norm();
  }
};

struct Room {
  Vec2 min{Vec2::Zero()};
  Vec2 max{Vec2::Zero()};
};

/// Opening in a corridor wall. `normal` points from the corridor into the room.
struct Door {
  Vec2 center{Vec2::Zero()};
  Vec2 normal{Vec2::UnitX()};
  double width = 0.0;
};

struct WorldConfig {
  double length = 12.0;  // x extent (m)
  double width = 9.0;    // y extent (m)
  double height = 2.4;
  double resolution = 0.1;
  double corridor_width = 2.0;
  double wall = 0.2;
  int rooms = 4;
  double door_min = 0.8;
  double door_max = 1.0;
  double min_room = 2.0;
  int obstacles_per_room = 0;
  double flight_height = 1.05;
};

struct World {
  Box bounds;
  double resolution = 0.1;
  std::vector<Box> boxes;
  std::vector<Room> rooms;
  std::vector<Door> doors;
  Room corridor;
  Pose start;
  uint64_t seed = 0;

  Vec3i dims() const;
  /// Distance from `p` to the nearest solid box.
  double clearance(const Vec3& p) const;
  bool solid(const Vec3& p) const;
};

/// Procedural corridor-with-rooms world; deterministic in (seed, config).
World generate_world(uint64_t seed, const WorldConfig& config = {});

std::string world_to_text(const World& w);
World world_from_text(const std::string& text);
void save_world(const std::string& path, const World& w);
World load_world(const std::string& path);

/// Fresh, empty belief map covering the world bounds.
VoxelMap make_map(const World& w, const MapParams& params = {});

/// Voxelized ground truth: occupied where the voxel center lies in a box.
class GroundTruth {
 public:
  explicit GroundTruth(const World& w);

  const Vec3i& dims() const { return dims_; }
  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int8_t at(const Vec3i& v) const { return grid_[linear(v)]; }
  const std::vector<int8_t>& grid() const { return grid_; }
  bool observable(const Vec3i& v) const { return observable_[linear(v)] != 0; }
  size_t observable_count() const { return observable_count_; }
  const std::vector<uint32_t>& observable_indices() const { return observable_list_; }
  size_t linear(const Vec3i& v) const {
    return size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z()));
  }

 private:
  Vec3i dims_;
  Vec3 origin_;
  double resolution_;
  std::vector<int8_t> grid_;
  std::vector<uint8_t> observable_;
  std::vector<uint32_t> observable_list_;
  size_t observable_count_ = 0;
};

struct CameraModel {
  double hfov = 80.0 * kPi / 180.0;
  double vfov = 60.0 * kPi / 180.0;
  double max_range = 4.5;
  int rows = 48;
  int cols = 64;

  void validate() const;
  /// Unit direction of ray (row, col) for a body with heading `yaw`.
  Vec3 direction(double yaw, int row, int col) const;
};

/// Casts every camera ray against the world boxes. Row-major output.
std::vector<RayEndpoint> render_depth(const World& world, const Pose& pose, const CameraModel& camera,
                                      Exec exec = Exec::kParallel);

/// Distance along a ray to the first box (infinity when none).
double first_hit(const World& world, const Vec3& origin, const Vec3& dir);

/// Fraction of observable ground-truth voxels whose belief is known.
double coverage(const VoxelMap& map, const GroundTruth& gt);

}  // namespace explore

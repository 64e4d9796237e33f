#pragma once

#include <explore/common.hpp>
#include <explore/frontier.hpp>
#include <explore/sim_world.hpp>
#include <explore/voxel_map.hpp>

#include <optional>
#include <vector>

namespace explore {

enum class BgsmMode { kCorridorExplore, kNavigateToSoi, kConfirmSoi, kEnterAoi, kExploreAoi, kExitAoi, kDone };
const char* mode_name(BgsmMode m);

enum class SoiStatus { kToBeConfirmed, kConfirmed, kRejected };
const char* status_name(SoiStatus s);

/// Door candidate. `direction` is a horizontal unit normal of the door plane;
/// once confirmed it points from the corridor side into the room.
struct SemanticObject {
  int id = -1;
  Vec3 p{Vec3::Zero()};
  Vec2 direction{Vec2::UnitX()};
  double width = 0.0;
  SoiStatus status = SoiStatus::kToBeConfirmed;
};

struct DoorParams {
  double w_min = 0.7;
  double w_max = 1.1;
  double h_min = 1.8;
  double z_lo = 0.3;
  double z_hi = 1.8;
  double window = 6.0;       // side of the square slice around the cluster (m)
  double edge_ratio = 0.5;   // edge threshold as a fraction of the max gradient
  int min_line_px = 10;
  int line_gap_px = 2;
  int hough_votes = 8;
  double angle_tol = 5.0 * kPi / 180.0;
  double collinear_tol_px = 1.0;
  double dedup = 0.5;
  double flight_height = 1.05;
  double confirm_distance = 1.3;
};

struct DoorCheck {
  bool ok = false;
  Vec2 center{Vec2::Zero()};
  double span = 0.0;
  double free_height = 0.0;
};

/// Stage 2: known-free span between flanking occupied columns along the door plane
/// through `center` (searching a few voxels along `normal`), plus free height
/// of the center column.
DoorCheck check_door(const VoxelMap& map, const Vec2& center, const Vec2& normal, const DoorParams& params);

/// 2-D occupancy projection over the z band, 255 where a column holds an
/// occupied voxel. `origin` receives the map voxel (x, y) of pixel (0, 0).
std::vector<uint8_t> occupancy_slice(const VoxelMap& map, const Vec2& center, const DoorParams& params, int& width,
                                     int& height, Eigen::Vector2i& origin);

/// Stage 1 (edges + line pairs) and stage 2 on the map around the cluster.
/// Returned candidates carry id -1.
std::vector<SemanticObject> detect_doors(const VoxelMap& map, const FrontierCluster& cluster, const DoorParams& params = {});

class SemanticRegistry {
 public:
  /// Adds candidates farther than `dedup` from every known object; returns new ids.
  std::vector<int> add(const std::vector<SemanticObject>& candidates, const DoorParams& params);
  /// Removes to-be-confirmed objects whose stage-2 check fails now.
  std::vector<int> recheck(const VoxelMap& map, const DoorParams& params);
  /// Confirmation at the SOI: close enough, inside the horizontal FOV and still
  /// passing stage 2 → confirmed (normal oriented away from the robot); else rejected.
  SoiStatus confirm(int id, const Pose& robot, const CameraModel& camera, const VoxelMap& map, const DoorParams& params);

  const std::vector<SemanticObject>& objects() const { return objects_; }
  const SemanticObject* find(int id) const;
  SemanticObject* find(int id);

 private:
  std::vector<SemanticObject> objects_;
  int next_id_ = 0;
};

/// Voxels reachable from `from` through known-free space without crossing the
/// plane of a confirmed door (6-connected flood fill).
std::vector<uint8_t> same_room_mask(const VoxelMap& map, const Vec3& from, const SemanticRegistry& registry);

/// Room iff the mode is EnterAOI/ExploreAOI and some cluster cell is in the mask.
FrontierLabel classify_frontier(const FrontierCluster& cluster, BgsmMode mode, const std::vector<uint8_t>& room_mask,
                                const VoxelMap& map);
FrontierLabel classify_frontier(const FrontierCluster& cluster, BgsmMode mode, const Vec3& robot,
                                const SemanticRegistry& registry, const VoxelMap& map);

}  // namespace explore

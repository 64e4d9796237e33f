#pragma once

#include <explore/common.hpp>
#include <explore/frontier.hpp>
#include <explore/path_search.hpp>
#include <explore/semantics.hpp>

#include <optional>
#include <string>
#include <vector>

namespace explore {

struct BehaviorParams {
  double max_velocity = 1.0;  // v_p,m
  double arrival_distance = 0.3;
  double arrival_yaw = 0.3;
  double approach_distance = 1.0;  // before the door
  double enter_distance = 0.5;     // past the door plane
  double exit_distance = 1.0;      // back outside the door
  void validate() const;
};

struct BgsmState {
  BgsmMode mode = BgsmMode::kCorridorExplore;
  std::optional<int> active_soi;
  std::optional<int> active_aoi;  // id of the door the room was entered through
};

enum class GoalKind { kNone, kCluster, kSoiApproach, kEnter, kExit };
const char* goal_kind_name(GoalKind k);

struct NavGoal {
  GoalKind kind = GoalKind::kNone;
  Pose pose;
  int cluster_id = -1;
  int soi_id = -1;
  double utility = 0.0;
};
std::string format_goal(const BgsmState& s, const NavGoal& g);

struct UtilityResult {
  double value = 0.0;
  Viewpoint best;
  double path_length = 0.0;
};

/// Utility over the cluster's viewpoints using shortest-path lengths from the
/// distance field (clamped below at one voxel). Throws RuntimeFailure
/// "cluster unreachable" when no viewpoint is reachable.
UtilityResult utility(const FrontierCluster& cluster, const VoxelMap& map, const DistanceField& field,
                      const BehaviorParams& params);

/// Per-cluster summary handed to the state machine.
struct ClusterOption {
  int id = -1;
  FrontierLabel label = FrontierLabel::kCorridor;
  double utility = 0.0;
  Viewpoint best;
};

struct BgsmInputs {
  std::vector<ClusterOption> clusters;  // reachable, non-deferred clusters
  std::vector<SemanticObject> sois;     // non-deferred objects
  Pose robot;
};

/// Door poses used by the state machine. `n` is the door normal oriented
/// away from `robot` for the approach and taken as stored otherwise.
Pose approach_pose(const SemanticObject& s, const Vec3& robot, const BehaviorParams& p);
Pose enter_pose(const SemanticObject& s, const BehaviorParams& p);
Pose exit_pose(const SemanticObject& s, const BehaviorParams& p);
bool arrived(const Pose& robot, const Pose& goal, const BehaviorParams& p);

/// Argmax utility among options with the given label (all labels when empty);
/// ties go to the smaller id.
std::optional<ClusterOption> best_option(const std::vector<ClusterOption>& options, std::optional<FrontierLabel> label);

/// One pure transition of the behavior goal state machine.
std::pair<BgsmState, NavGoal> step_bgsm(const BgsmState& state, const BgsmInputs& in, const BehaviorParams& params);

}  // namespace explore

#include <explore/behavior.hpp>

#include <cstdio>

namespace explore {

void BehaviorParams::validate() const {
  if (!(max_velocity > 0)) throw ConfigError("max velocity must be positive");
  if (!(arrival_distance > 0) || !(arrival_yaw > 0)) throw ConfigError("arrival tolerances must be positive");
}

const char* goal_kind_name(GoalKind k) {
  switch (k) {
    case GoalKind::kNone: return "none";
    case GoalKind::kCluster: return "cluster";
    case GoalKind::kSoiApproach: return "soi_approach";
    case GoalKind::kEnter: return "enter";
    case GoalKind::kExit: return "exit";
  }
  return "?";
}

std::string format_goal(const BgsmState& s, const NavGoal& g) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "mode=%s goal=%s pose=(%.3f,%.3f,%.3f,%.3f) cluster=%d soi=%d utility=%.6g",
                mode_name(s.mode), goal_kind_name(g.kind), g.pose.p.x(), g.pose.p.y(), g.pose.p.z(), g.pose.yaw,
                g.cluster_id, g.soi_id, g.utility);
  return buf;
}

UtilityResult utility(const FrontierCluster& cluster, const VoxelMap& map, const DistanceField& field,
                      const BehaviorParams& params) {
  UtilityResult best;
  bool any = false;
  for (const auto& vp : cluster.viewpoints) {
    const double len = field.at(map.to_index(vp.p));
    if (!std::isfinite(len)) continue;
    const double l = std::max(len, map.resolution());
    const double u = params.max_velocity / l * vp.gain;
    if (!any || u > best.value) {
      best = {u, vp, len};
      any = true;
    }
  }
  if (!any) throw RuntimeFailure("cluster unreachable");
  return best;
}

namespace {

Pose facing(const Vec2& p, const Vec2& dir, double z) {
  Pose out;
  out.p = Vec3(p.x(), p.y(), z);
  out.yaw = std::atan2(dir.y(), dir.x());
  return out;
}

const SemanticObject* find_soi(const BgsmInputs& in, const std::optional<int>& id) {
  if (!id) return nullptr;
  for (const auto& s : in.sois)
    if (s.id == *id) return &s;
  return nullptr;
}

NavGoal cluster_goal(const ClusterOption& c) {
  NavGoal g;
  g.kind = GoalKind::kCluster;
  g.pose.p = c.best.p;
  g.pose.yaw = c.best.yaw;
  g.cluster_id = c.id;
  g.utility = c.utility;
  return g;
}

NavGoal soi_goal(GoalKind kind, const Pose& pose, int id) {
  NavGoal g;
  g.kind = kind;
  g.pose = pose;
  g.soi_id = id;
  return g;
}

}  // namespace

Pose approach_pose(const SemanticObject& s, const Vec3& robot, const BehaviorParams& p) {
  Vec2 n = s.direction.normalized();
  if (n.dot(s.p.head<2>() - robot.head<2>()) < 0) n = -n;
  return facing(s.p.head<2>() - p.approach_distance * n, n, s.p.z());
}

Pose enter_pose(const SemanticObject& s, const BehaviorParams& p) {
  const Vec2 n = s.direction.normalized();
  return facing(s.p.head<2>() + p.enter_distance * n, n, s.p.z());
}

Pose exit_pose(const SemanticObject& s, const BehaviorParams& p) {
  const Vec2 n = s.direction.normalized();
  return facing(s.p.head<2>() - p.exit_distance * n, -n, s.p.z());
}

bool arrived(const Pose& robot, const Pose& goal, const BehaviorParams& p) {
  return (robot.p - goal.p).norm() <= p.arrival_distance && angle_dist(robot.yaw, goal.yaw) <= p.arrival_yaw;
}

std::optional<ClusterOption> best_option(const std::vector<ClusterOption>& options, std::optional<FrontierLabel> label) {
  std::optional<ClusterOption> best;
  for (const auto& o : options) {
    if (label && o.label != *label) continue;
    if (!best || o.utility > best->utility || (o.utility == best->utility && o.id < best->id)) best = o;
  }
  return best;
}

std::pair<BgsmState, NavGoal> step_bgsm(const BgsmState& state, const BgsmInputs& in, const BehaviorParams& params) {
  BgsmState s = state;
  auto to_corridor = [&] {
    BgsmState c;
    c.mode = BgsmMode::kCorridorExplore;
    return step_bgsm(c, in, params);
  };
  switch (state.mode) {
    case BgsmMode::kDone:
      return {s, NavGoal{}};

    case BgsmMode::kCorridorExplore: {
      const SemanticObject* pick = nullptr;
      double pick_d = 0.0;
      for (const auto& o : in.sois) {
        if (o.status != SoiStatus::kToBeConfirmed) continue;
        const double d = (o.p.head<2>() - in.robot.p.head<2>()).norm();
        if (!pick || d < pick_d || (d == pick_d && o.id < pick->id)) {
          pick = &o;
          pick_d = d;
        }
      }
      if (pick) {
        s.mode = BgsmMode::kNavigateToSoi;
        s.active_soi = pick->id;
        s.active_aoi.reset();
        return {s, soi_goal(GoalKind::kSoiApproach, approach_pose(*pick, in.robot.p, params), pick->id)};
      }
      if (auto best = best_option(in.clusters, std::nullopt)) return {s, cluster_goal(*best)};
      s.mode = BgsmMode::kDone;
      s.active_soi.reset();
      s.active_aoi.reset();
      return {s, NavGoal{}};
    }

    case BgsmMode::kNavigateToSoi:
    case BgsmMode::kConfirmSoi: {
      const SemanticObject* o = find_soi(in, state.active_soi);
      if (!o || o->status == SoiStatus::kRejected) return to_corridor();
      if (o->status == SoiStatus::kConfirmed) {
        s.mode = BgsmMode::kEnterAoi;
        return {s, soi_goal(GoalKind::kEnter, enter_pose(*o, params), o->id)};
      }
      const Pose ap = approach_pose(*o, in.robot.p, params);
      if (state.mode == BgsmMode::kNavigateToSoi && arrived(in.robot, ap, params)) s.mode = BgsmMode::kConfirmSoi;
      return {s, soi_goal(GoalKind::kSoiApproach, ap, o->id)};
    }

    case BgsmMode::kEnterAoi: {
      const SemanticObject* o = find_soi(in, state.active_soi);
      if (!o || o->status != SoiStatus::kConfirmed) return to_corridor();
      const Pose ep = enter_pose(*o, params);
      if (arrived(in.robot, ep, params)) {
        BgsmState e;
        e.mode = BgsmMode::kExploreAoi;
        e.active_aoi = o->id;
        return step_bgsm(e, in, params);
      }
      return {s, soi_goal(GoalKind::kEnter, ep, o->id)};
    }

    case BgsmMode::kExploreAoi: {
      if (auto best = best_option(in.clusters, FrontierLabel::kRoom)) return {s, cluster_goal(*best)};
      const SemanticObject* o = find_soi(in, state.active_aoi);
      if (!o) return to_corridor();
      s.mode = BgsmMode::kExitAoi;
      return step_bgsm(s, in, params);
    }

    case BgsmMode::kExitAoi: {
      const SemanticObject* o = find_soi(in, state.active_aoi);
      if (!o) return to_corridor();
      const Pose xp = exit_pose(*o, params);
      if (arrived(in.robot, xp, params)) return to_corridor();
      return {s, soi_goal(GoalKind::kExit, xp, o->id)};
    }
  }
  return {s, NavGoal{}};
}

}  // namespace explore

#include <explore/behavior.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace explore;
using namespace explore::testing_util;

namespace {

SemanticObject door(int id, SoiStatus st, const Vec2& p = Vec2(5, 5), const Vec2& n = Vec2::UnitX()) {
  SemanticObject s;
  s.id = id;
  s.p = Vec3(p.x(), p.y(), 1.05);
  s.direction = n;
  s.width = 0.9;
  s.status = st;
  return s;
}

ClusterOption option(int id, FrontierLabel label, double u) {
  ClusterOption o;
  o.id = id;
  o.label = label;
  o.utility = u;
  o.best.p = Vec3(id, 0, 1.05);
  return o;
}

Pose at(const Pose& p) { return p; }

}  // namespace

TEST(Utility, GainOverPathLength) {
  VoxelMap m = small_map({30, 10, 22});
  for (size_t i = 0; i < m.voxel_count(); ++i) set_trinary(m, m.unlinear(i), kFree);
  SafetyParams sp;
  sp.robot_radius = 0.05;
  sp.margin = 0;
  const SafetyGrid s(m, sp);
  const DistanceField f(m, s, {2, 5, 10});
  FrontierCluster c;
  c.viewpoints = {{m.center({12, 5, 10}), 0.0, 50.0}, {m.center({7, 5, 10}), 0.0, 30.0}, {m.center({2, 5, 10}), 0.0, 1.0}};
  BehaviorParams bp;
  bp.max_velocity = 2.0;
  const UtilityResult u = utility(c, m, f, bp);
  // 30 / 0.5 beats 50 / 1.0 and 1 / 0.1 (length clamped to one voxel)
  EXPECT_NEAR(u.value, 2.0 * 30.0 / 0.5, 1e-9);
  EXPECT_EQ(u.best.p, m.center({7, 5, 10}));
  EXPECT_NEAR(u.path_length, 0.5, 1e-9);
  c.viewpoints.erase(c.viewpoints.begin() + 1);
  EXPECT_NEAR(utility(c, m, f, bp).value, 2.0 * 50.0 / 1.0, 1e-9);
  c.viewpoints = {{m.center({2, 5, 10}), 0.0, 3.0}};
  EXPECT_NEAR(utility(c, m, f, bp).value, 2.0 * 3.0 / 0.1, 1e-9);
  c.viewpoints = {{Vec3(-5, 0, 0), 0, 10}};
  EXPECT_THROW(utility(c, m, f, bp), RuntimeFailure);
}

TEST(BestOption, MatchesExhaustiveArgmax) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> u(0, 4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ClusterOption> opts;
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int i = 0; i < n; ++i)
      opts.push_back(option(int(rng() % 20), u(rng) % 2 ? FrontierLabel::kRoom : FrontierLabel::kCorridor, u(rng)));
    for (auto label : {std::optional<FrontierLabel>{}, std::optional<FrontierLabel>{FrontierLabel::kRoom}}) {
      const auto got = best_option(opts, label);
      const ClusterOption* ref = nullptr;
      for (const auto& o : opts) {
        if (label && o.label != *label) continue;
        bool dominated = false;
        for (const auto& p : opts) {
          if (label && p.label != *label) continue;
          if (p.utility > o.utility || (p.utility == o.utility && p.id < o.id)) dominated = true;
        }
        if (!dominated) ref = &o;
      }
      ASSERT_EQ(got.has_value(), ref != nullptr);
      if (ref) {
        EXPECT_EQ(got->id, ref->id);
        EXPECT_EQ(got->utility, ref->utility);
      }
    }
  }
}

TEST(Bgsm, CorridorPrefersNearestPendingDoor) {
  BgsmInputs in;
  in.robot.p = Vec3(0, 0, 1.05);
  in.clusters = {option(3, FrontierLabel::kCorridor, 100.0)};
  in.sois = {door(0, SoiStatus::kToBeConfirmed, Vec2(6, 0)), door(1, SoiStatus::kToBeConfirmed, Vec2(3, 0)),
             door(2, SoiStatus::kRejected, Vec2(1, 0))};
  const auto [s, g] = step_bgsm(BgsmState{}, in, BehaviorParams{});
  EXPECT_EQ(s.mode, BgsmMode::kNavigateToSoi);
  EXPECT_EQ(s.active_soi, 1);
  EXPECT_EQ(g.kind, GoalKind::kSoiApproach);
  EXPECT_NEAR(g.pose.p.x(), 2.0, 1e-12);  // 1 m before the door, facing it
  EXPECT_NEAR(g.pose.yaw, 0.0, 1e-12);
}

TEST(Bgsm, CorridorTakesBestClusterThenDone) {
  BgsmInputs in;
  in.clusters = {option(3, FrontierLabel::kCorridor, 1.0), option(5, FrontierLabel::kRoom, 2.0)};
  auto [s, g] = step_bgsm(BgsmState{}, in, BehaviorParams{});
  EXPECT_EQ(s.mode, BgsmMode::kCorridorExplore);
  EXPECT_EQ(g.kind, GoalKind::kCluster);
  EXPECT_EQ(g.cluster_id, 5);
  in.clusters.clear();
  std::tie(s, g) = step_bgsm(BgsmState{}, in, BehaviorParams{});
  EXPECT_EQ(s.mode, BgsmMode::kDone);
  EXPECT_EQ(g.kind, GoalKind::kNone);
  std::tie(s, g) = step_bgsm(s, in, BehaviorParams{});
  EXPECT_EQ(s.mode, BgsmMode::kDone);
}

TEST(Bgsm, FullDoorCycle) {
  const BehaviorParams P;
  BgsmInputs in;
  in.robot.p = Vec3(0, 5, 1.05);
  in.sois = {door(0, SoiStatus::kToBeConfirmed)};
  in.clusters = {option(1, FrontierLabel::kCorridor, 1.0)};

  auto [s, g] = step_bgsm(BgsmState{}, in, P);
  ASSERT_EQ(s.mode, BgsmMode::kNavigateToSoi);
  // arriving at the approach pose switches to confirmation
  in.robot = g.pose;
  std::tie(s, g) = step_bgsm(s, in, P);
  ASSERT_EQ(s.mode, BgsmMode::kConfirmSoi);
  EXPECT_EQ(g.kind, GoalKind::kSoiApproach);

  in.sois[0].status = SoiStatus::kConfirmed;
  std::tie(s, g) = step_bgsm(s, in, P);
  ASSERT_EQ(s.mode, BgsmMode::kEnterAoi);
  EXPECT_EQ(g.kind, GoalKind::kEnter);
  EXPECT_NEAR(g.pose.p.x(), 5.5, 1e-12);

  in.robot = g.pose;
  in.clusters = {option(1, FrontierLabel::kCorridor, 9.0), option(4, FrontierLabel::kRoom, 1.0)};
  std::tie(s, g) = step_bgsm(s, in, P);
  ASSERT_EQ(s.mode, BgsmMode::kExploreAoi);
  EXPECT_EQ(s.active_aoi, 0);
  EXPECT_EQ(g.cluster_id, 4);  // room clusters only

  in.clusters = {option(1, FrontierLabel::kCorridor, 9.0)};
  std::tie(s, g) = step_bgsm(s, in, P);
  ASSERT_EQ(s.mode, BgsmMode::kExitAoi);
  EXPECT_EQ(g.kind, GoalKind::kExit);
  EXPECT_NEAR(g.pose.p.x(), 4.0, 1e-12);
  EXPECT_NEAR(std::abs(g.pose.yaw), kPi, 1e-12);

  in.robot = g.pose;
  std::tie(s, g) = step_bgsm(s, in, P);
  EXPECT_EQ(s.mode, BgsmMode::kCorridorExplore);
  EXPECT_EQ(g.cluster_id, 1);
  EXPECT_FALSE(s.active_aoi.has_value());
}

TEST(Bgsm, RejectedOrMissingSoiFallsBack) {
  BgsmInputs in;
  in.clusters = {option(2, FrontierLabel::kCorridor, 1.0)};
  in.sois = {door(0, SoiStatus::kRejected)};
  for (BgsmMode m : {BgsmMode::kNavigateToSoi, BgsmMode::kConfirmSoi, BgsmMode::kEnterAoi}) {
    BgsmState st;
    st.mode = m;
    st.active_soi = 0;
    auto [s, g] = step_bgsm(st, in, BehaviorParams{});
    EXPECT_EQ(s.mode, BgsmMode::kCorridorExplore) << mode_name(m);
    EXPECT_EQ(g.cluster_id, 2);
    st.active_soi = 9;
    std::tie(s, g) = step_bgsm(st, in, BehaviorParams{});
    EXPECT_EQ(s.mode, BgsmMode::kCorridorExplore);
  }
}

TEST(Bgsm, DoorPoses) {
  const BehaviorParams P;
  const SemanticObject d = door(0, SoiStatus::kConfirmed, Vec2(2, 2), Vec2::UnitY());
  const Pose ap = approach_pose(d, Vec3(2, 5, 1.05), P);  // robot on the +y side
  EXPECT_NEAR(ap.p.y(), 3.0, 1e-12);
  EXPECT_NEAR(ap.yaw, -kPi / 2, 1e-12);
  EXPECT_NEAR(enter_pose(d, P).p.y(), 2.5, 1e-12);
  EXPECT_NEAR(exit_pose(d, P).p.y(), 1.0, 1e-12);
  Pose r = at(ap);
  EXPECT_TRUE(arrived(r, ap, P));
  r.yaw += 0.31;
  EXPECT_FALSE(arrived(r, ap, P));
  r = ap;
  r.p.x() += 0.31;
  EXPECT_FALSE(arrived(r, ap, P));
}

TEST(Utility, RatioAndZeroGain) {
  VoxelMap m = small_map({60, 10, 22});
  for (size_t i = 0; i < m.voxel_count(); ++i) set_trinary(m, m.unlinear(i), kFree);
  SafetyParams sp;
  sp.robot_radius = 0.05;
  sp.margin = 0;
  const SafetyGrid s(m, sp);
  const DistanceField f(m, s, {5, 5, 10});
  FrontierCluster near, far;
  near.viewpoints = {{m.center({25, 5, 10}), 0.0, 40.0}};
  far.viewpoints = {{m.center({45, 5, 10}), 0.0, 40.0}};
  const BehaviorParams bp;
  EXPECT_NEAR(utility(near, m, f, bp).value, 2.0 * utility(far, m, f, bp).value, 1e-9);
  near.viewpoints[0].gain = 0;
  EXPECT_EQ(utility(near, m, f, bp).value, 0.0);
}

TEST(Bgsm, PureAndScaleInvariant) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    BgsmInputs in;
    for (int i = 0; i < 3; ++i)
      in.clusters.push_back(option(i, FrontierLabel::kCorridor, std::uniform_real_distribution<double>(0, 10)(rng)));
    BehaviorParams p;
    const auto a = step_bgsm(BgsmState{}, in, p);
    const auto b = step_bgsm(BgsmState{}, in, p);
    EXPECT_EQ(format_goal(a.first, a.second), format_goal(b.first, b.second));
    // exhaustive argmax over the three hand-built options
    int arg = 0;
    for (int i = 1; i < 3; ++i)
      if (in.clusters[size_t(i)].utility > in.clusters[size_t(arg)].utility) arg = i;
    EXPECT_EQ(a.second.cluster_id, arg);
    EXPECT_EQ(a.second.pose.p, in.clusters[size_t(arg)].best.p);
    // utilities scale with v_max; the choice does not
    BgsmInputs scaled = in;
    for (auto& o : scaled.clusters) o.utility *= 3.0;
    const auto c = step_bgsm(BgsmState{}, scaled, p);
    EXPECT_EQ(c.second.cluster_id, arg);
    EXPECT_DOUBLE_EQ(c.second.utility, 3.0 * a.second.utility);
  }
}

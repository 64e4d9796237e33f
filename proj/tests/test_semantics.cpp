#include <explore/semantics.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace explore;
using namespace explore::testing_util;

TEST(DoorCheck, SpanOfOpening) {
  std::mt19937_64 rng(31);
  for (int gap = 7; gap <= 10; ++gap) {
    const WallFixture f = wall_fixture(rng, gap);
    const DoorCheck c = check_door(f.map, f.door, f.normal, DoorParams{});
    ASSERT_TRUE(c.ok) << gap;
    EXPECT_NEAR(c.span, gap * 0.1, 1e-9);
    EXPECT_NEAR(c.free_height, 2.4, 1e-9);
    EXPECT_LE((c.center - f.door).norm(), 0.051);
  }
}

TEST(DoorCheck, RejectsNarrowWideAndLow) {
  std::mt19937_64 rng(32);
  EXPECT_FALSE(check_door(wall_fixture(rng, 5).map, Vec2(4, 4), Vec2::UnitY(), DoorParams{}).ok);
  WallFixture wide = wall_fixture(rng, 14);
  EXPECT_FALSE(check_door(wide.map, wide.door, wide.normal, DoorParams{}).ok);
  WallFixture low = wall_fixture(rng, 9);
  // lintel at 1.5 m leaves 1.5 m of free height
  for (int z = 15; z < 24; ++z)
    for (int dx = -6; dx <= 6; ++dx)
      for (int dy = -6; dy <= 6; ++dy) {
        const Vec3i v = low.map.to_index(Vec3(low.door.x() + 0.1 * dx, low.door.y() + 0.1 * dy, 0.05 + 0.1 * z));
        if (low.map.is_free(v) && std::abs((low.map.center(v).head<2>() - low.door).dot(low.normal)) < 0.25)
          set_trinary(low.map, v, kOccupied);
      }
  EXPECT_FALSE(check_door(low.map, low.door, low.normal, DoorParams{}).ok);
}

TEST(DoorDetection, FindsDoorSizedGaps) {
  std::mt19937_64 rng(33);
  int hits = 0;
  for (int k = 0; k < 40; ++k) {
    const int gap = 7 + k % 4;
    const WallFixture f = wall_fixture(rng, gap);
    const auto found = detect_doors(f.map, f.cluster);
    hits += door_found(found, f.door);
    for (const auto& s : found) {
      EXPECT_EQ(s.id, -1);
      EXPECT_NEAR(std::abs(s.direction.dot(f.normal)), 1.0, 1e-6);
    }
  }
  EXPECT_GE(hits, 36);
}

TEST(DoorDetection, NothingOnSolidOrWideOpenings) {
  std::mt19937_64 rng(34);
  for (int k = 0; k < 20; ++k) {
    EXPECT_TRUE(detect_doors(wall_fixture(rng, 0).map, wall_fixture(rng, 0).cluster).empty());
    const WallFixture wide = wall_fixture(rng, 20 + k % 10);
    EXPECT_TRUE(detect_doors(wide.map, wide.cluster).empty());
  }
}

TEST(Registry, DedupAndRecheck) {
  std::mt19937_64 rng(35);
  WallFixture f = wall_fixture(rng, 9);
  SemanticRegistry reg;
  SemanticObject s;
  s.p = Vec3(f.door.x(), f.door.y(), 1.05);
  s.direction = f.normal;
  s.width = 0.9;
  EXPECT_EQ(reg.add({s}, DoorParams{}), std::vector<int>{0});
  SemanticObject near = s;
  near.p.x() += 0.3;
  EXPECT_TRUE(reg.add({near}, DoorParams{}).empty());
  EXPECT_TRUE(reg.recheck(f.map, DoorParams{}).empty());
  // close the opening
  for (size_t i = 0; i < f.map.voxel_count(); ++i) {
    const Vec3i v = f.map.unlinear(i);
    if ((f.map.center(v).head<2>() - f.door).cwiseAbs().maxCoeff() < 0.6 && std::abs((f.map.center(v).head<2>() - f.door).dot(f.normal)) < 0.05)
      set_trinary(f.map, v, kOccupied);
  }
  EXPECT_EQ(reg.recheck(f.map, DoorParams{}), std::vector<int>{0});
  EXPECT_TRUE(reg.objects().empty());
}

TEST(Registry, ConfirmNeedsProximityAndView) {
  std::mt19937_64 rng(36);
  const WallFixture f = wall_fixture(rng, 9);
  const CameraModel cam;
  SemanticObject s;
  s.p = Vec3(f.door.x(), f.door.y(), 1.05);
  s.direction = -f.normal;
  s.width = 0.9;
  auto pose_at = [&](double back, double yaw) {
    Pose p;
    p.p = Vec3(f.door.x(), f.door.y(), 1.05) - back * Vec3(f.normal.x(), f.normal.y(), 0.0);
    p.yaw = yaw;
    return p;
  };
  const double facing = std::atan2(f.normal.y(), f.normal.x());
  {
    SemanticRegistry reg;
    reg.add({s}, DoorParams{});
    EXPECT_EQ(reg.confirm(0, pose_at(1.0, facing), cam, f.map, DoorParams{}), SoiStatus::kConfirmed);
    // normal now points from the robot through the door
    EXPECT_GT(reg.find(0)->direction.dot(f.normal), 0.99);
    EXPECT_EQ(reg.confirm(0, pose_at(3.0, facing), cam, f.map, DoorParams{}), SoiStatus::kConfirmed);
  }
  {
    SemanticRegistry reg;
    reg.add({s}, DoorParams{});
    EXPECT_EQ(reg.confirm(0, pose_at(2.0, facing), cam, f.map, DoorParams{}), SoiStatus::kRejected);
  }
  {
    SemanticRegistry reg;
    reg.add({s}, DoorParams{});
    EXPECT_EQ(reg.confirm(0, pose_at(1.0, facing + kPi), cam, f.map, DoorParams{}), SoiStatus::kRejected);
  }
  SemanticRegistry reg;
  EXPECT_THROW(reg.confirm(7, pose_at(1.0, facing), cam, f.map, DoorParams{}), RuntimeFailure);
}

TEST(RoomMask, ConfirmedDoorSeparatesSides) {
  std::mt19937_64 rng(37);
  const WallFixture f = wall_fixture(rng, 9);
  SemanticRegistry reg;
  SemanticObject s;
  s.p = Vec3(f.door.x(), f.door.y(), 1.05);
  s.direction = f.normal;
  s.width = 0.9;
  reg.add({s}, DoorParams{});
  const Vec2 a2 = f.door - 1.5 * f.normal, b2 = f.door + 1.5 * f.normal;
  const Vec3 a(a2.x(), a2.y(), 1.05), b(b2.x(), b2.y(), 1.05);
  auto open = same_room_mask(f.map, a, reg);
  EXPECT_TRUE(open[f.map.linear(f.map.to_index(b))]);
  Pose robot;
  robot.p = a;
  robot.yaw = std::atan2(f.normal.y(), f.normal.x());
  ASSERT_EQ(reg.confirm(0, robot, CameraModel{}, f.map, DoorParams{}), SoiStatus::kRejected);  // 1.5 m away

  SemanticRegistry reg2;
  reg2.add({s}, DoorParams{});
  robot.p = Vec3(f.door.x(), f.door.y(), 1.05) - Vec3(f.normal.x(), f.normal.y(), 0);
  ASSERT_EQ(reg2.confirm(0, robot, CameraModel{}, f.map, DoorParams{}), SoiStatus::kConfirmed);
  const auto inside = same_room_mask(f.map, b, reg2);
  EXPECT_TRUE(inside[f.map.linear(f.map.to_index(b))]);
  EXPECT_FALSE(inside[f.map.linear(f.map.to_index(a))]);

  FrontierCluster room, corridor;
  room.cells = {f.map.to_index(b)};
  corridor.cells = {f.map.to_index(a)};
  EXPECT_EQ(classify_frontier(room, BgsmMode::kExploreAoi, inside, f.map), FrontierLabel::kRoom);
  EXPECT_EQ(classify_frontier(corridor, BgsmMode::kExploreAoi, inside, f.map), FrontierLabel::kCorridor);
  EXPECT_EQ(classify_frontier(room, BgsmMode::kCorridorExplore, inside, f.map), FrontierLabel::kCorridor);
}

TEST(DoorDetection, SingleCandidateAtGapCenter) {
  std::mt19937_64 rng(38);
  for (int k = 0; k < 10; ++k) {
    const WallFixture f = wall_fixture(rng, 8);
    const auto found = detect_doors(f.map, f.cluster);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_LE((found[0].p.head<2>() - f.door).cwiseAbs().maxCoeff(), 0.1 + 1e-9);
    EXPECT_NEAR(std::abs(found[0].direction.dot(f.normal)), 1.0, 1e-9);
    EXPECT_TRUE(check_door(f.map, found[0].p.head<2>(), found[0].direction, DoorParams{}).ok);
  }
}

TEST(Registry, ConfirmedPersistsAndRejectedIsFinal) {
  std::mt19937_64 rng(39);
  WallFixture f = wall_fixture(rng, 9);
  SemanticObject s;
  s.p = Vec3(f.door.x(), f.door.y(), 1.05);
  s.direction = f.normal;
  s.width = 0.9;
  SemanticRegistry reg;
  reg.add({s, s}, DoorParams{});  // second is a duplicate
  ASSERT_EQ(reg.objects().size(), 1u);
  s.p += Vec3(-2.0 * f.normal.y(), 2.0 * f.normal.x(), 0.0);  // far along the wall: no opening there
  reg.add({s}, DoorParams{});
  Pose robot;
  robot.p = Vec3(f.door.x(), f.door.y(), 1.05) - Vec3(f.normal.x(), f.normal.y(), 0);
  robot.yaw = std::atan2(f.normal.y(), f.normal.x());
  ASSERT_EQ(reg.confirm(0, robot, CameraModel{}, f.map, DoorParams{}), SoiStatus::kConfirmed);
  ASSERT_EQ(reg.confirm(1, robot, CameraModel{}, f.map, DoorParams{}), SoiStatus::kRejected);
  // noise in the opening: the confirmed door stays
  set_trinary(f.map, f.map.to_index(Vec3(f.door.x(), f.door.y(), 1.0)), kOccupied);
  reg.recheck(f.map, DoorParams{});
  ASSERT_NE(reg.find(0), nullptr);
  EXPECT_EQ(reg.find(0)->status, SoiStatus::kConfirmed);
  EXPECT_EQ(reg.confirm(1, robot, CameraModel{}, f.map, DoorParams{}), SoiStatus::kRejected);
}

TEST(RoomMask, ClassificationDeterministic) {
  std::mt19937_64 rng(40);
  const WallFixture f = wall_fixture(rng, 9);
  SemanticRegistry reg;
  const Vec3 robot(f.door.x() + 1.5 * f.normal.x(), f.door.y() + 1.5 * f.normal.y(), 1.05);
  FrontierCluster c;
  c.cells = {f.map.to_index(Vec3(f.door.x(), f.door.y(), 1.05))};
  const auto a = classify_frontier(c, BgsmMode::kExploreAoi, robot, reg, f.map);
  const auto b = classify_frontier(c, BgsmMode::kExploreAoi, robot, reg, f.map);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, FrontierLabel::kRoom);  // no confirmed door: one connected space
}

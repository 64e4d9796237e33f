#include <explore/info_gain.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace explore;
using namespace explore::testing_util;

namespace {

// 12 x 3 x 3 corridor: voxel 0 free, 1..6 unknown, 7.. occupied along the center row.
VoxelMap corridor() {
  VoxelMap m = small_map({12, 3, 3});
  for (int x = 0; x < 12; ++x) set_trinary(m, {x, 1, 1}, x == 0 ? kFree : x <= 6 ? kUnknown : kOccupied);
  return m;
}

PredictionStore store_with(const VoxelMap& m, const Vec3i& v, int8_t value) {
  OccupancyBlock like({1, 1, 1});
  like.origin = v;
  PredictedBlock b(like);
  b.mask[0] = 1;
  b.probs[0] = value == kOccupied ? 0.9 : value == kFree ? 0.1 : 0.5;
  PredictionStore s(m);
  s.insert(b);
  return s;
}

PredictionStore random_store(const VoxelMap& m, std::mt19937_64& rng) {
  OccupancyBlock like(m.dims());
  PredictedBlock b(like);
  std::uniform_real_distribution<double> u(0, 1);
  for (size_t i = 0; i < b.size(); ++i) {
    b.mask[i] = u(rng) < 0.7;
    b.probs[i] = u(rng);
  }
  PredictionStore s(m);
  s.insert(b);
  return s;
}

}  // namespace

TEST(GainRay, StopsAfterPredictedOccupied) {
  const VoxelMap m = corridor();
  const Vec3 a = m.center({0, 1, 1}), b = m.center({11, 1, 1});
  EXPECT_EQ(classical_gain_ray(m, a, b), 6);
  EXPECT_EQ(predicted_gain_ray(m, nullptr, a, b), 6);
  const PredictionStore occ = store_with(m, {3, 1, 1}, kOccupied);
  EXPECT_EQ(predicted_gain_ray(m, &occ, a, b), 3);
}

TEST(GainRay, PredictedFreeAndUnknownStillCount) {
  const VoxelMap m = corridor();
  const Vec3 a = m.center({0, 1, 1}), b = m.center({11, 1, 1});
  const PredictionStore fr = store_with(m, {2, 1, 1}, kFree);
  EXPECT_EQ(predicted_gain_ray(m, &fr, a, b), 6);
  const PredictionStore un = store_with(m, {2, 1, 1}, kUnknown);
  EXPECT_EQ(predicted_gain_ray(m, &un, a, b), 6);
}

TEST(GainRay, PredictionOnKnownVoxelIgnored) {
  VoxelMap m = corridor();
  const Vec3 a = m.center({0, 1, 1}), b = m.center({11, 1, 1});
  set_trinary(m, {2, 1, 1}, kFree);
  const PredictionStore occ = store_with(m, {2, 1, 1}, kOccupied);
  EXPECT_EQ(predicted_gain_ray(m, &occ, a, b), 5);
}

TEST(GainRay, NullStoreMatchesClassical) {
  std::mt19937_64 rng(11);
  const VoxelMap m = random_map({16, 16, 8}, rng, 0.5, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = random_point(m, rng), b = random_point(m, rng);
    EXPECT_EQ(predicted_gain_ray(m, nullptr, a, b), classical_gain_ray(m, a, b));
  }
}

TEST(GainRay, PredictedNeverExceedsClassical) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 200; ++k) {
    const VoxelMap m = random_map({12, 12, 6}, rng, 0.3, 0.05);
    const PredictionStore s = random_store(m, rng);
    for (int i = 0; i < 20; ++i) {
      const Vec3 a = random_point(m, rng), b = random_point(m, rng);
      const int p = predicted_gain_ray(m, &s, a, b), c = classical_gain_ray(m, a, b);
      EXPECT_LE(p, c);
      EXPECT_GE(p, 0);
    }
  }
}

TEST(PredictionStore, CoverageAndClear) {
  const VoxelMap m = small_map({5, 5, 5});
  PredictionStore s = store_with(m, {2, 2, 2}, kOccupied);
  EXPECT_TRUE(s.covered({2, 2, 2}));
  EXPECT_EQ(s.at({2, 2, 2}), kOccupied);
  EXPECT_FALSE(s.covered({1, 2, 2}));
  EXPECT_FALSE(s.covered({-1, 0, 0}));
  EXPECT_EQ(s.block_count(), 1u);
  s.clear();
  EXPECT_FALSE(s.covered({2, 2, 2}));
}

TEST(SlidingWindow, MatchesDirectSummation) {
  std::mt19937_64 rng(13);
  const CameraModel cam;
  const SamplerParams params;
  const SweepLayout L = SweepLayout::make(cam, params);
  EXPECT_EQ(L.total_cols, L.cols + (params.yaw_count - 1) * L.cols_per_yaw);
  for (int k = 0; k < 100; ++k) {
    const VoxelMap m = random_map({40, 40, 20}, rng, 0.75, 0.01);
    const PredictionStore s = random_store(m, rng);
    const Vec3 p = random_point(m, rng, 0.5);
    const double yaw0 = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    const auto win = window_gains(m, &s, p, yaw0, cam, L);
    ASSERT_EQ(win.size(), size_t(params.yaw_count));
    for (int w = 0; w < L.yaw_count; ++w) {
      double direct = 0;
      for (int c = 0; c < L.cols; ++c) {
        const double az = L.azimuth(yaw0, w * L.cols_per_yaw + c);
        for (int r = 0; r < L.rows; ++r)
          direct += predicted_gain_ray(m, &s, p, ray_end(p, az, L.elevation(cam, r), cam.max_range));
      }
      EXPECT_EQ(win[size_t(w)], direct) << "window " << w;
      // same view evaluated as a standalone camera; angles agree up to rounding
      const double view = view_gain(m, &s, p, L.window_yaw(yaw0, w), cam, params.ray_stride);
      EXPECT_NEAR(view, direct, 0.02 * direct + 3);
    }
  }
}

TEST(Sampler, RejectsBadTiling) {
  const CameraModel cam;
  SamplerParams p;
  p.ray_stride = 5;
  EXPECT_THROW(p.validate(cam), ConfigError);
  p = {};
  p.slice_width = 7.0 * kPi / 180.0;
  EXPECT_THROW(p.validate(cam), ConfigError);
  p = {};
  p.yaw_count = 4;
  EXPECT_THROW(p.validate(cam), ConfigError);
  EXPECT_NO_THROW(SamplerParams{}.validate(cam));
}

namespace {

// Known free for x < 3 m, unknown beyond; frontier cluster on the boundary.
struct HalfSpace {
  VoxelMap map = small_map({60, 40, 24});
  FrontierCluster cluster;
  HalfSpace() {
    for (int z = 4; z < 18; ++z)
      for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 30; ++x) set_trinary(map, {x, y, z}, kFree);
    for (int y = 10; y < 30; ++y)
      for (int z = 8; z < 13; ++z) cluster.cells.push_back({29, y, z});
    cluster.centroid = Vec3(2.95, 2.0, 1.05);
  }
};

}  // namespace

TEST(GainRay, SimpleCorridors) {
  VoxelMap m = small_map({12, 3, 3});
  const Vec3 a = m.center({0, 1, 1}), b = m.center({10, 1, 1});
  EXPECT_EQ(classical_gain_ray(m, a, m.center({9, 1, 1})), 10);  // all unknown, start voxel included
  set_trinary(m, {2, 1, 1}, kOccupied);
  EXPECT_EQ(classical_gain_ray(m, a, b), 2);
  for (int x = 0; x < 12; ++x) set_trinary(m, {x, 1, 1}, kFree);
  EXPECT_EQ(classical_gain_ray(m, a, b), 0);
  EXPECT_EQ(predicted_gain_ray(m, nullptr, a, b), 0);
}

TEST(GainRay, BoundedByTraversedVoxels) {
  std::mt19937_64 rng(14);
  const VoxelMap m = random_map({10, 10, 6}, rng, 0.3, 0.1);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a = random_point(m, rng), b = random_point(m, rng);
    int walked = 0;
    walk_ray(m, a, b, [&](const Vec3i&) {
      ++walked;
      return true;
    });
    EXPECT_LE(classical_gain_ray(m, a, b), walked);
  }
}

TEST(Sampler, OnAxisViewFacesCentroid) {
  // mirrored half-space: known free for x >= 3 m, so the single sampling angle
  // puts every candidate on the symmetry axis through the centroid
  VoxelMap m = small_map({60, 40, 24});
  for (int z = 4; z < 18; ++z)
    for (int y = 0; y < 40; ++y)
      for (int x = 30; x < 60; ++x) set_trinary(m, {x, y, z}, kFree);
  FrontierCluster c;
  for (int y = 10; y < 30; ++y)
    for (int z = 8; z < 13; ++z) c.cells.push_back({30, y, z});
  c.centroid = Vec3(3.05, 2.0, 1.05);
  const SafetyGrid safety(m);
  SamplerParams params;
  params.angle_step = 2.0 * kPi;
  const auto vps = sample_viewpoints(c, m, nullptr, safety, CameraModel{}, params);
  ASSERT_EQ(vps.size(), 3u);
  for (const auto& v : vps) {
    const Vec3 d = c.centroid - v.p;
    EXPECT_LE(angle_dist(v.yaw, std::atan2(d.y(), d.x())), params.slice_width + 1e-9);
  }
}

TEST(Sampler, PredictedWallLowersEveryViewpoint) {
  const HalfSpace h;
  const SafetyGrid safety(h.map);
  // ground truth behind the frontier: free for 0.5 m, then a wall
  OccupancyBlock ctx(h.map.dims(), kUnknown);
  for (int z = 0; z < 24; ++z)
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 60; ++x) ctx.at(x, y, z) = x < 30 ? h.map.trinary({x, y, z}) : x < 35 ? kFree : kOccupied;
  OccupancyBlock in(h.map.dims());
  in.values = h.map.trinary_grid();
  PredictionStore store(h.map);
  store.insert(Predictor(parse_predictor("oracle")).predict(in, &ctx));
  const CameraModel cam;
  const SamplerParams params;
  const auto vps = sample_viewpoints(h.cluster, h.map, &store, safety, cam, params);
  ASSERT_FALSE(vps.empty());
  for (const auto& v : vps)
    EXPECT_LT(v.gain, view_gain(h.map, nullptr, v.p, v.yaw, cam, params.ray_stride));
}

TEST(Sampler, SortedSafeAndDeterministic) {
  // free slab at flight height, unknown beyond x = 3 m
  VoxelMap m = small_map({60, 40, 24});
  for (int z = 4; z < 18; ++z)
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 30; ++x) set_trinary(m, {x, y, z}, kFree);
  const SafetyGrid safety(m);
  FrontierCluster c;
  for (int y = 10; y < 30; ++y)
    for (int z = 8; z < 13; ++z) c.cells.push_back({29, y, z});
  c.centroid = Vec3(2.95, 2.0, 1.05);
  const CameraModel cam;
  const SamplerParams params;
  const auto a = sample_viewpoints(c, m, nullptr, safety, cam, params, Exec::kSerial);
  const auto b = sample_viewpoints(c, m, nullptr, safety, cam, params, Exec::kParallel);
  ASSERT_FALSE(a.empty());
  ASSERT_EQ(a.size(), b.size());
  EXPECT_LE(a.size(), size_t(params.n_vp));
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].p, b[i].p);
    EXPECT_EQ(a[i].yaw, b[i].yaw);
    EXPECT_EQ(a[i].gain, b[i].gain);
    EXPECT_GE(a[i].gain, params.min_gain);
    EXPECT_TRUE(safety.safe(m.to_index(a[i].p)));
    if (i) EXPECT_GE(a[i - 1].gain, a[i].gain);
    EXPECT_DOUBLE_EQ(a[i].gain, view_gain(m, nullptr, a[i].p, a[i].yaw, cam, params.ray_stride));
  }
  // best view faces the unknown half
  EXPECT_GT(std::cos(a[0].yaw), 0.0);
}

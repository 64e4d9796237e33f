#pragma once

#include <explore/common.hpp>
#include <explore/frontier.hpp>
#include <explore/occ_predict.hpp>
#include <explore/path_search.hpp>
#include <explore/sim_world.hpp>
#include <explore/voxel_map.hpp>

#include <vector>

namespace explore {

/// Dense overlay of predicted trinary values on the map grid. A voxel holds
/// the value from the most recently inserted block covering it.
class PredictionStore {
 public:
  static constexpr int8_t kNotCovered = -2;

  explicit PredictionStore(const VoxelMap& map);

  void insert(const PredictedBlock& block, const PredictionCutoff& cut = {});
  void clear();

  int8_t at(const Vec3i& v) const;
  bool covered(const Vec3i& v) const { return at(v) != kNotCovered; }
  size_t block_count() const { return blocks_; }

 private:
  Vec3i dims_;
  std::vector<int8_t> grid_;
  size_t blocks_ = 0;
};

/// Counts observed-unknown voxels along the ray, stopping at observed
/// occupancy, map exit, or after counting a predicted-occupied voxel. A null
/// store means no predictions.
int predicted_gain_ray(const VoxelMap& map, const PredictionStore* store, const Vec3& start, const Vec3& end);

/// Unknown voxels along the ray until observed occupancy or map exit.
int classical_gain_ray(const VoxelMap& map, const Vec3& start, const Vec3& end);

struct SamplerParams {
  std::vector<double> radii{1.0, 1.5, 2.0};
  double angle_step = 20.0 * kPi / 180.0;
  std::vector<double> heights{1.05};
  int yaw_count = 9;  // odd; centered on the direction to the centroid
  double yaw_step = 20.0 * kPi / 180.0;
  double slice_width = 10.0 * kPi / 180.0;
  int ray_stride = 4;
  int n_vp = 10;
  double min_gain = 4.0;  // viewpoints seeing fewer unknown voxels are dropped

  void validate(const CameraModel& camera) const;
};

/// Column/yaw bookkeeping of the sliding-window sweep for one camera.
struct SweepLayout {
  int cols = 0;            // strided camera columns per view
  int rows = 0;            // strided camera rows
  double col_width = 0.0;  // angular column spacing (rad)
  int cols_per_slice = 0;
  int cols_per_yaw = 0;
  int yaw_count = 0;
  int total_cols = 0;  // sweep width in columns

  static SweepLayout make(const CameraModel& camera, const SamplerParams& params);
  /// Azimuth of sweep column n for a sweep centered on `yaw0`.
  double azimuth(double yaw0, int n) const { return yaw0 + (double(n) + 0.5 - 0.5 * total_cols) * col_width; }
  double elevation(const CameraModel& camera, int r) const { return -0.5 * camera.vfov + (r + 0.5) * camera.vfov / rows; }
  /// Yaw of window k (first sweep column k * cols_per_yaw).
  double window_yaw(double yaw0, int k) const { return yaw0 + (k - (yaw_count - 1) / 2) * cols_per_yaw * col_width; }
};

/// End point of a ray with the given angles from `p`.
Vec3 ray_end(const Vec3& p, double azimuth, double elevation, double range);

/// Per-yaw gains at one position via slice sums (the sliding window).
std::vector<double> window_gains(const VoxelMap& map, const PredictionStore* store, const Vec3& p, double yaw0,
                                 const CameraModel& camera, const SweepLayout& layout);

/// Gain of the strided camera at pose (p, yaw), with or without predictions.
double view_gain(const VoxelMap& map, const PredictionStore* store, const Vec3& p, double yaw, const CameraModel& camera,
                 int stride);
double view_gain_classical(const VoxelMap& map, const Vec3& p, double yaw, const CameraModel& camera, int stride);

/// Two-stage viewpoint generation around a cluster; sorted by gain (stable),
/// truncated to n_vp. Viewpoints below min_gain are dropped.
std::vector<Viewpoint> sample_viewpoints(const FrontierCluster& cluster, const VoxelMap& map,
                                         const PredictionStore* store, const SafetyGrid& safety,
                                         const CameraModel& camera, const SamplerParams& params,
                                         Exec exec = Exec::kParallel);

}  // namespace explore

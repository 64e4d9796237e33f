#pragma once

#include <explore/common.hpp>
#include <explore/voxel_map.hpp>

#include <map>
#include <vector>

namespace explore {

enum class FrontierLabel { kUnlabeled, kRoom, kCorridor };

/// Candidate sensing pose near a frontier cluster with its (predicted) gain.
struct Viewpoint {
  Vec3 p{Vec3::Zero()};
  double yaw = 0.0;
  double gain = 0.0;
};

struct FrontierCluster {
  int id = -1;
  std::vector<Vec3i> cells;
  Vec3 centroid{Vec3::Zero()};
  Aabb bbox;
  FrontierLabel label = FrontierLabel::kUnlabeled;
  std::vector<Viewpoint> viewpoints;
  bool viewpoints_ready = false;
  bool predicted = false;
};

struct FrontierParams {
  // largest covariance eigenvalue (m^2) allowed before a PCA split; 1 m std
  double split_eigenvalue = 1.0;
  int min_cluster_size = 5;
};

/// Known-free voxel with at least one unknown 6-neighbor.
bool is_frontier_cell(const VoxelMap& map, const Vec3i& v);

/// All frontier cells inside `box` (clipped to the map), in x-fastest order.
std::vector<Vec3i> frontier_cells_in(const VoxelMap& map, const Aabb& box, Exec exec = Exec::kParallel);

/// Recursive PCA bisection until the largest eigenvalue is within the threshold.
std::vector<std::vector<Vec3i>> split_cells(const VoxelMap& map, std::vector<Vec3i> cells, double max_eigenvalue);

/// Largest eigenvalue of the covariance of the cell centers (m^2).
double largest_eigenvalue(const VoxelMap& map, const std::vector<Vec3i>& cells);

struct FrontierUpdate {
  std::vector<int> removed;
  std::vector<int> added;
};

/// Incrementally maintained set of frontier clusters.
class FrontierRegistry {
 public:
  FrontierRegistry(const VoxelMap& map, FrontierParams params = {});

  /// Re-evaluates clusters touching `changed` and grows new ones from it.
  FrontierUpdate update(const VoxelMap& map, const Aabb& changed);

  const std::map<int, FrontierCluster>& clusters() const { return clusters_; }
  std::map<int, FrontierCluster>& clusters() { return clusters_; }
  const FrontierCluster* find(int id) const;
  FrontierCluster* find(int id);
  const FrontierParams& params() const { return params_; }

 private:
  void remove(int id, std::vector<Vec3i>* keep_frontier, const VoxelMap& map);

  FrontierParams params_;
  Vec3i dims_;
  std::vector<int> owner_;
  std::vector<uint32_t> visit_mark_;
  uint32_t visit_id_ = 0;
  std::map<int, FrontierCluster> clusters_;
  int next_id_ = 0;
};

}  // namespace explore

#include <explore/frontier.hpp>

#include <Eigen/Eigenvalues>

#include <deque>

namespace explore {

namespace {

const Vec3i kNbr6[6] = {Vec3i(1, 0, 0), Vec3i(-1, 0, 0), Vec3i(0, 1, 0),
                        Vec3i(0, -1, 0), Vec3i(0, 0, 1), Vec3i(0, 0, -1)};

Eigen::Matrix3d covariance(const VoxelMap& map, const std::vector<Vec3i>& cells, Vec3* mean_out) {
  Vec3 mean = Vec3::Zero();
  for (const auto& c : cells) mean += map.center(c);
  mean /= double(cells.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& c : cells) {
    const Vec3 d = map.center(c) - mean;
    cov += d * d.transpose();
  }
  cov /= double(cells.size());
  if (mean_out) *mean_out = mean;
  return cov;
}

}  // namespace

bool is_frontier_cell(const VoxelMap& map, const Vec3i& v) {
  if (!map.is_free(v)) return false;
  for (const auto& n : kNbr6)
    if (map.is_unknown(v + n)) return true;
  return false;
}

std::vector<Vec3i> frontier_cells_in(const VoxelMap& map, const Aabb& box, Exec exec) {
  const Aabb b = box.clipped(map.dims());
  if (b.empty()) return {};
  const int nz = b.max.z() - b.min.z() + 1;
  std::vector<std::vector<Vec3i>> per_layer(static_cast<size_t>(nz));
  auto scan_layer = [&](int k) {
    const int z = b.min.z() + k;
    auto& out = per_layer[size_t(k)];
    for (int y = b.min.y(); y <= b.max.y(); ++y)
      for (int x = b.min.x(); x <= b.max.x(); ++x) {
        const Vec3i v(x, y, z);
        if (is_frontier_cell(map, v)) out.push_back(v);
      }
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < nz; ++k) scan_layer(k);
  } else {
    for (int k = 0; k < nz; ++k) scan_layer(k);
  }
  std::vector<Vec3i> cells;
  for (auto& l : per_layer) cells.insert(cells.end(), l.begin(), l.end());
  return cells;
}

double largest_eigenvalue(const VoxelMap& map, const std::vector<Vec3i>& cells) {
  if (cells.size() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(covariance(map, cells, nullptr));
  return es.eigenvalues()(2);
}

std::vector<std::vector<Vec3i>> split_cells(const VoxelMap& map, std::vector<Vec3i> cells, double max_eigenvalue) {
  std::vector<std::vector<Vec3i>> out;
  std::vector<std::vector<Vec3i>> stack;
  stack.push_back(std::move(cells));
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    if (cur.size() < 2) {
      out.push_back(std::move(cur));
      continue;
    }
    Vec3 mean;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(covariance(map, cur, &mean));
    if (es.eigenvalues()(2) <= max_eigenvalue) {
      out.push_back(std::move(cur));
      continue;
    }
    const Vec3 axis = es.eigenvectors().col(2);
    std::vector<Vec3i> a, b;
    for (const auto& c : cur) ((map.center(c) - mean).dot(axis) >= 0.0 ? a : b).push_back(c);
    if (a.empty() || b.empty()) {
      out.push_back(std::move(cur));
      continue;
    }
    // keep output order deterministic: first half processed first
    stack.push_back(std::move(b));
    stack.push_back(std::move(a));
  }
  return out;
}

FrontierRegistry::FrontierRegistry(const VoxelMap& map, FrontierParams params)
    : params_(params), dims_(map.dims()), owner_(map.voxel_count(), -1), visit_mark_(map.voxel_count(), 0) {}

const FrontierCluster* FrontierRegistry::find(int id) const {
  auto it = clusters_.find(id);
  return it == clusters_.end() ? nullptr : &it->second;
}

FrontierCluster* FrontierRegistry::find(int id) {
  auto it = clusters_.find(id);
  return it == clusters_.end() ? nullptr : &it->second;
}

void FrontierRegistry::remove(int id, std::vector<Vec3i>* keep_frontier, const VoxelMap& map) {
  auto it = clusters_.find(id);
  if (it == clusters_.end()) return;
  for (const auto& c : it->second.cells) {
    owner_[map.linear(c)] = -1;
    if (keep_frontier && is_frontier_cell(map, c)) keep_frontier->push_back(c);
  }
  clusters_.erase(it);
}

FrontierUpdate FrontierRegistry::update(const VoxelMap& map, const Aabb& changed) {
  FrontierUpdate result;
  if (map.dims() != dims_) throw ConfigError("frontier registry bound to a different map");
  const Aabb box = changed.dilated(1).clipped(map.dims());
  if (box.empty()) return result;

  std::vector<Vec3i> seeds;
  std::vector<int> stale;
  for (const auto& [id, cl] : clusters_) {
    if (!cl.bbox.intersects(box)) continue;
    for (const auto& c : cl.cells)
      if (!is_frontier_cell(map, c)) {
        stale.push_back(id);
        break;
      }
  }
  for (int id : stale) {
    remove(id, &seeds, map);
    result.removed.push_back(id);
  }
  for (const auto& v : frontier_cells_in(map, box))
    if (owner_[map.linear(v)] < 0) seeds.push_back(v);

  if (++visit_id_ == 0) {
    std::fill(visit_mark_.begin(), visit_mark_.end(), 0);
    visit_id_ = 1;
  }

  for (const auto& seed : seeds) {
    const size_t si = map.linear(seed);
    if (visit_mark_[si] == visit_id_) continue;
    // Region growing over all frontier cells; clusters it touches are merged
    // into the new component so cluster cells always form whole components.
    std::vector<Vec3i> component;
    std::deque<Vec3i> queue{seed};
    visit_mark_[si] = visit_id_;
    while (!queue.empty()) {
      const Vec3i v = queue.front();
      queue.pop_front();
      const int own = owner_[map.linear(v)];
      if (own >= 0) {
        remove(own, nullptr, map);
        result.removed.push_back(own);
      }
      component.push_back(v);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const Vec3i n = v + Vec3i(dx, dy, dz);
            if (!map.in_map(n)) continue;
            const size_t ni = map.linear(n);
            if (visit_mark_[ni] == visit_id_) continue;
            if (!is_frontier_cell(map, n)) continue;
            visit_mark_[ni] = visit_id_;
            queue.push_back(n);
          }
    }
    if (int(component.size()) < params_.min_cluster_size) continue;
    for (auto& part : split_cells(map, std::move(component), params_.split_eigenvalue)) {
      FrontierCluster cl;
      cl.id = next_id_++;
      cl.cells = std::move(part);
      Vec3 sum = Vec3::Zero();
      for (const auto& c : cl.cells) {
        sum += map.center(c);
        cl.bbox.extend(c);
        owner_[map.linear(c)] = cl.id;
      }
      cl.centroid = sum / double(cl.cells.size());
      result.added.push_back(cl.id);
      clusters_.emplace(cl.id, std::move(cl));
    }
  }
  // a cluster both created and absorbed within this update is neither
  std::vector<int> added;
  for (int id : result.added)
    if (clusters_.count(id)) added.push_back(id);
  std::vector<int> removed;
  for (int id : result.removed)
    if (id < next_id_ && std::find(result.added.begin(), result.added.end(), id) == result.added.end())
      removed.push_back(id);
  result.added = std::move(added);
  result.removed = std::move(removed);
  return result;
}

}  // namespace explore

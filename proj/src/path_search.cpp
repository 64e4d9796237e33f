#include <explore/path_search.hpp>

#include <queue>

namespace explore {

namespace {

struct Step {
  Vec3i d;
  double len;  // in voxels
};

const std::vector<Step>& steps26() {
  static const std::vector<Step> s = [] {
    std::vector<Step> out;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx || dy || dz) out.push_back({Vec3i(dx, dy, dz), std::sqrt(double(dx * dx + dy * dy + dz * dz))});
    return out;
  }();
  return s;
}

// distance from a point to the unit cube of voxel v, in voxel units
double cube_distance(const Vec3& u, const Vec3i& v) {
  const Vec3 lo = v.cast<double>();
  const Vec3 d = (lo - u).cwiseMax(u - (lo + Vec3::Ones())).cwiseMax(Vec3::Zero());
  return d.norm();
}

using QItem = std::pair<double, size_t>;

}  // namespace

SafetyGrid::SafetyGrid(const VoxelMap& map, const SafetyParams& params) : params_(params), dims_(map.dims()) {
  if (params.robot_radius <= 0 || params.margin < 0) throw ConfigError("robot radius must be positive");
  const double res = map.resolution();
  z_lo_ = std::max(0, int(std::ceil((params.z_min - map.origin().z()) / res - 0.5 - 1e-9)));
  z_hi_ = std::min(dims_.z() - 1, int(std::floor((params.z_max - map.origin().z()) / res - 0.5 + 1e-9)));
  if (z_lo_ > z_hi_) throw ConfigError("flight band contains no voxel layer");
  const double r = params.clearance() / res;
  reach_ = int(std::ceil(r + 0.5));
  // voxels whose cube comes closer than the clearance to the center voxel's center
  const Vec3 c(0.5, 0.5, 0.5);
  for (int z = -reach_; z <= reach_; ++z)
    for (int y = -reach_; y <= reach_; ++y)
      for (int x = -reach_; x <= reach_; ++x)
        if (cube_distance(c, Vec3i(x, y, z)) < r - 1e-9) offsets_.emplace_back(x, y, z);
  safe_.assign(map.voxel_count(), 0);
  rebuild(map);
}

bool SafetyGrid::compute(const VoxelMap& map, const Vec3i& v) const {
  if (!in_band(v.z()) || !map.is_free(v)) return false;
  for (const auto& o : offsets_)
    if (!map.is_free(v + o)) return false;
  return true;
}

void SafetyGrid::rebuild(const VoxelMap& map) { update(map, Aabb::of(Vec3i::Zero(), map.dims() - Vec3i::Ones())); }

void SafetyGrid::update(const VoxelMap& map, const Aabb& changed) {
  if (map.dims() != dims_) throw ConfigError("safety grid bound to a different map");
  Aabb box = changed.dilated(reach_).clipped(dims_);
  if (box.empty()) return;
  box.min.z() = std::max(box.min.z(), z_lo_);
  box.max.z() = std::min(box.max.z(), z_hi_);
  for (int z = box.min.z(); z <= box.max.z(); ++z)
    for (int y = box.min.y(); y <= box.max.y(); ++y)
      for (int x = box.min.x(); x <= box.max.x(); ++x) {
        const Vec3i v(x, y, z);
        safe_[map.linear(v)] = compute(map, v) ? 1 : 0;
      }
}

bool SafetyGrid::safe(const Vec3i& v) const {
  if ((v.array() < 0).any() || (v.array() >= dims_.array()).any()) return false;
  return safe_[size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z()))] != 0;
}

std::optional<Vec3i> SafetyGrid::nearest_safe(const VoxelMap& map, const Vec3& p, double radius) const {
  const Vec3i c = map.to_index(p);
  const int k = int(std::ceil(radius / map.resolution())) + 1;
  std::optional<Vec3i> best;
  double best_d = radius;
  for (int z = c.z() - k; z <= c.z() + k; ++z)
    for (int y = c.y() - k; y <= c.y() + k; ++y)
      for (int x = c.x() - k; x <= c.x() + k; ++x) {
        const Vec3i v(x, y, z);
        if (!safe(v)) continue;
        const double d = (map.center(v) - p).norm();
        if (d <= best_d + 1e-12 && (!best || d < best_d - 1e-12)) {
          best = v;
          best_d = d;
        }
      }
  return best;
}

double map_clearance(const VoxelMap& map, const Vec3& p, double cap) {
  const double res = map.resolution();
  const Vec3 u = (p - map.origin()) / res;
  const double r = cap / res;
  const Vec3i lo(int(std::floor(u.x() - r)), int(std::floor(u.y() - r)), int(std::floor(u.z() - r)));
  const Vec3i hi(int(std::floor(u.x() + r)), int(std::floor(u.y() + r)), int(std::floor(u.z() + r)));
  double best = r;
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Vec3i v(x, y, z);
        if (map.is_free(v)) continue;
        best = std::min(best, cube_distance(u, v));
      }
  return best * res;
}

bool segment_clear(const VoxelMap& map, const Vec3& a, const Vec3& b, double r) {
  const double len = (b - a).norm();
  const int n = std::max(1, int(std::ceil(len / (0.25 * map.resolution()))));
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = a + (b - a) * (double(i) / n);
    if (map_clearance(map, p, r) < r) return false;
  }
  return true;
}

DistanceField::DistanceField(const VoxelMap& map, const SafetyGrid& safety, const Vec3i& source) : dims_(map.dims()) {
  dist_.assign(map.voxel_count(), std::numeric_limits<double>::infinity());
  parent_.assign(map.voxel_count(), -1);
  if (!map.in_map(source)) return;
  const double res = map.resolution();
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> open;
  dist_[map.linear(source)] = 0.0;
  open.emplace(0.0, map.linear(source));
  while (!open.empty()) {
    const auto [d, i] = open.top();
    open.pop();
    if (d > dist_[i]) continue;
    const Vec3i v = map.unlinear(i);
    for (const auto& s : steps26()) {
      const Vec3i n = v + s.d;
      if (!safety.safe(n)) continue;
      const size_t ni = map.linear(n);
      const double nd = d + s.len * res;
      if (nd < dist_[ni]) {
        dist_[ni] = nd;
        parent_[ni] = int(i);
        open.emplace(nd, ni);
      }
    }
  }
}

double DistanceField::at(const Vec3i& v) const {
  if (dist_.empty() || (v.array() < 0).any() || (v.array() >= dims_.array()).any())
    return std::numeric_limits<double>::infinity();
  return dist_[size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z()))];
}

std::vector<Vec3i> DistanceField::path_to(const Vec3i& v) const {
  if (!reachable(v)) return {};
  std::vector<Vec3i> out;
  auto unlin = [&](size_t i) {
    const int x = int(i % size_t(dims_.x()));
    const size_t r = i / size_t(dims_.x());
    return Vec3i(x, int(r % size_t(dims_.y())), int(r / size_t(dims_.y())));
  };
  int i = int(size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z())));
  while (i >= 0) {
    out.push_back(unlin(size_t(i)));
    i = parent_[size_t(i)];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Vec3i> astar(const VoxelMap& map, const SafetyGrid& safety, const Vec3i& start, const Vec3i& goal) {
  if (!map.in_map(start) || !map.in_map(goal)) return {};
  if (start == goal) return {start};
  if (!safety.safe(goal)) return {};
  const double res = map.resolution();
  std::vector<double> g(map.voxel_count(), std::numeric_limits<double>::infinity());
  std::vector<int> parent(map.voxel_count(), -1);
  std::vector<uint8_t> closed(map.voxel_count(), 0);
  auto h = [&](const Vec3i& v) { return (v - goal).cast<double>().norm() * res; };
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> open;
  const size_t si = map.linear(start), gi = map.linear(goal);
  g[si] = 0.0;
  open.emplace(h(start), si);
  while (!open.empty()) {
    const size_t i = open.top().second;
    open.pop();
    if (closed[i]) continue;
    closed[i] = 1;
    if (i == gi) break;
    const Vec3i v = map.unlinear(i);
    for (const auto& s : steps26()) {
      const Vec3i n = v + s.d;
      if (!safety.safe(n)) continue;
      const size_t ni = map.linear(n);
      if (closed[ni]) continue;
      const double ng = g[i] + s.len * res;
      if (ng < g[ni] - 1e-12) {
        g[ni] = ng;
        parent[ni] = int(i);
        open.emplace(ng + h(n), ni);
      }
    }
  }
  if (!closed[gi]) return {};
  std::vector<Vec3i> out;
  for (int i = int(gi); i >= 0; i = parent[size_t(i)]) out.push_back(map.unlinear(size_t(i)));
  std::reverse(out.begin(), out.end());
  return out;
}

double path_length(const VoxelMap& map, const std::vector<Vec3i>& path) {
  double len = 0.0;
  for (size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).cast<double>().norm() * map.resolution();
  return len;
}

}  // namespace explore

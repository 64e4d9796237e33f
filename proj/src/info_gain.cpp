#include <explore/info_gain.hpp>

#include <numeric>

namespace explore {

PredictionStore::PredictionStore(const VoxelMap& map) : dims_(map.dims()), grid_(map.voxel_count(), kNotCovered) {}

void PredictionStore::insert(const PredictedBlock& block, const PredictionCutoff& cut) {
  for (int z = 0; z < block.dims.z(); ++z)
    for (int y = 0; y < block.dims.y(); ++y)
      for (int x = 0; x < block.dims.x(); ++x) {
        const Vec3i v = block.origin + Vec3i(x, y, z);
        if ((v.array() < 0).any() || (v.array() >= dims_.array()).any()) continue;
        const size_t bi = size_t(x) + size_t(block.dims.x()) * (size_t(y) + size_t(block.dims.y()) * size_t(z));
        const int8_t val = block.mask[bi] ? predicted_trinary(block.probs[bi], cut) : int8_t(kUnknown);
        grid_[size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z()))] = val;
      }
  ++blocks_;
}

void PredictionStore::clear() {
  std::fill(grid_.begin(), grid_.end(), kNotCovered);
  blocks_ = 0;
}

int8_t PredictionStore::at(const Vec3i& v) const {
  if ((v.array() < 0).any() || (v.array() >= dims_.array()).any()) return kNotCovered;
  return grid_[size_t(v.x()) + size_t(dims_.x()) * (size_t(v.y()) + size_t(dims_.y()) * size_t(v.z()))];
}

int predicted_gain_ray(const VoxelMap& map, const PredictionStore* store, const Vec3& start, const Vec3& end) {
  int gain = 0;
  walk_ray(map, start, end, [&](const Vec3i& v) {
    const int8_t obs = map.trinary(v);
    if (obs == kOccupied) return false;
    if (obs == kFree) return true;
    ++gain;
    if (!store) return true;
    // not covered, predicted unknown and predicted free all continue
    return store->at(v) != kOccupied;
  });
  return gain;
}

int classical_gain_ray(const VoxelMap& map, const Vec3& start, const Vec3& end) {
  int gain = 0;
  walk_ray(map, start, end, [&](const Vec3i& v) {
    const int8_t obs = map.trinary(v);
    if (obs == kOccupied) return false;
    if (obs == kUnknown) ++gain;
    return true;
  });
  return gain;
}

void SamplerParams::validate(const CameraModel& camera) const {
  if (radii.empty() || heights.empty()) throw ConfigError("sampler needs at least one radius and one height");
  for (double r : radii)
    if (!(r > 0)) throw ConfigError("sampler radii must be positive");
  if (!(angle_step > 0)) throw ConfigError("sampler angular step must be positive");
  if (yaw_count < 1 || yaw_count % 2 == 0) throw ConfigError("sampler yaw count must be odd and positive");
  if (n_vp < 1) throw ConfigError("sampler N_vp must be at least 1");
  if (!(min_gain >= 0)) throw ConfigError("sampler minimum gain must be non-negative");
  if (ray_stride < 1 || camera.cols % ray_stride || camera.rows % ray_stride)
    throw ConfigError("ray stride must divide the camera grid");
  SweepLayout::make(camera, *this);
}

SweepLayout SweepLayout::make(const CameraModel& camera, const SamplerParams& params) {
  SweepLayout s;
  s.cols = camera.cols / params.ray_stride;
  s.rows = camera.rows / params.ray_stride;
  s.col_width = camera.hfov / s.cols;
  const double per_slice = params.slice_width / s.col_width;
  const double per_yaw = params.yaw_step / s.col_width;
  s.cols_per_slice = int(std::lround(per_slice));
  s.cols_per_yaw = int(std::lround(per_yaw));
  if (s.cols_per_slice < 1 || std::abs(per_slice - s.cols_per_slice) > 1e-6 || s.cols % s.cols_per_slice ||
      s.cols_per_yaw < 1 || std::abs(per_yaw - s.cols_per_yaw) > 1e-6 || s.cols_per_yaw % s.cols_per_slice)
    throw ConfigError("slice width and yaw step must tile the strided camera columns");
  s.yaw_count = params.yaw_count;
  s.total_cols = s.cols + (s.yaw_count - 1) * s.cols_per_yaw;
  return s;
}

Vec3 ray_end(const Vec3& p, double azimuth, double elevation, double range) {
  return p + range * Vec3(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                          std::sin(elevation));
}

std::vector<double> window_gains(const VoxelMap& map, const PredictionStore* store, const Vec3& p, double yaw0,
                                 const CameraModel& camera, const SweepLayout& L) {
  const int n_slices = L.total_cols / L.cols_per_slice;
  std::vector<double> slice(static_cast<size_t>(n_slices), 0.0);
  for (int n = 0; n < L.total_cols; ++n) {
    const double az = L.azimuth(yaw0, n);
    int g = 0;
    for (int r = 0; r < L.rows; ++r) g += predicted_gain_ray(map, store, p, ray_end(p, az, L.elevation(camera, r), camera.max_range));
    slice[size_t(n / L.cols_per_slice)] += g;
  }
  const int per_window = L.cols / L.cols_per_slice, shift = L.cols_per_yaw / L.cols_per_slice;
  std::vector<double> out(static_cast<size_t>(L.yaw_count), 0.0);
  for (int k = 0; k < L.yaw_count; ++k)
    for (int s = 0; s < per_window; ++s) out[size_t(k)] += slice[size_t(k * shift + s)];
  return out;
}

namespace {

template <class RayGain>
double strided_view(const Vec3& p, double yaw, const CameraModel& camera, int stride, RayGain&& gain) {
  const int cols = camera.cols / stride, rows = camera.rows / stride;
  double g = 0.0;
  for (int c = 0; c < cols; ++c) {
    const double az = yaw - 0.5 * camera.hfov + (c + 0.5) * camera.hfov / cols;
    for (int r = 0; r < rows; ++r) {
      const double el = -0.5 * camera.vfov + (r + 0.5) * camera.vfov / rows;
      g += gain(ray_end(p, az, el, camera.max_range));
    }
  }
  return g;
}

}  // namespace

double view_gain(const VoxelMap& map, const PredictionStore* store, const Vec3& p, double yaw, const CameraModel& camera,
                 int stride) {
  return strided_view(p, yaw, camera, stride, [&](const Vec3& e) { return predicted_gain_ray(map, store, p, e); });
}

double view_gain_classical(const VoxelMap& map, const Vec3& p, double yaw, const CameraModel& camera, int stride) {
  return strided_view(p, yaw, camera, stride, [&](const Vec3& e) { return classical_gain_ray(map, p, e); });
}

std::vector<Viewpoint> sample_viewpoints(const FrontierCluster& cluster, const VoxelMap& map,
                                         const PredictionStore* store, const SafetyGrid& safety,
                                         const CameraModel& camera, const SamplerParams& params, Exec exec) {
  if (cluster.cells.empty()) return {};
  const SweepLayout layout = SweepLayout::make(camera, params);
  const Vec3& c = cluster.centroid;

  std::vector<Vec3i> cand;
  const int n_ang = std::max(1, int(std::lround(2.0 * kPi / params.angle_step)));
  for (double h : params.heights)
    for (double r : params.radii)
      for (int a = 0; a < n_ang; ++a) {
        const double ang = a * params.angle_step;
        const Vec3 p(c.x() + r * std::cos(ang), c.y() + r * std::sin(ang), h);
        const Vec3i v = map.to_index(p);
        if (!safety.safe(v)) continue;
        if (std::find(cand.begin(), cand.end(), v) != cand.end()) continue;
        cand.push_back(v);
      }

  std::vector<Viewpoint> best(cand.size());
  auto eval = [&](int i) {
    const Vec3 p = map.center(cand[size_t(i)]);
    const double yaw0 = std::atan2(c.y() - p.y(), c.x() - p.x());
    const auto gains = window_gains(map, store, p, yaw0, camera, layout);
    int k_best = (layout.yaw_count - 1) / 2;
    for (int k = 0; k < layout.yaw_count; ++k)
      if (gains[size_t(k)] > gains[size_t(k_best)]) k_best = k;
    best[size_t(i)] = {p, wrap_angle(layout.window_yaw(yaw0, k_best)), gains[size_t(k_best)]};
  };
  const int n = int(cand.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) eval(i);
  } else {
    for (int i = 0; i < n; ++i) eval(i);
  }
  best.erase(std::remove_if(best.begin(), best.end(), [&](const Viewpoint& v) { return v.gain < params.min_gain; }),
             best.end());
  std::stable_sort(best.begin(), best.end(), [](const Viewpoint& a, const Viewpoint& b) { return a.gain > b.gain; });
  if (best.size() > size_t(params.n_vp)) best.resize(size_t(params.n_vp));
  return best;
}

}  // namespace explore

#include <explore/sim_world.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace explore {

namespace {

struct IBox {
  int x0, y0, z0, x1, y1, z1;
};

}  // namespace

Vec3i World::dims() const {
  const Vec3 e = (bounds.max - bounds.min) / resolution;
  return Vec3i(int(std::lround(e.x())), int(std::lround(e.y())), int(std::lround(e.z())));
}

double World::clearance(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : boxes) d = std::min(d, b.distance(p));
  // leaving the bounds counts as contact
  const Vec3 lo = p - bounds.min, hi = bounds.max - p;
  d = std::min({d, lo.minCoeff(), hi.minCoeff()});
  return std::max(d, 0.0);
}

bool World::solid(const Vec3& p) const {
  for (const auto& b : boxes)
    if (b.contains(p)) return true;
  return false;
}

World generate_world(uint64_t seed, const WorldConfig& c) {
  const double res = c.resolution;
  auto units = [res](double m) { return int(std::lround(m / res)); };
  const int L = units(c.length), W = units(c.width), H = units(c.height);
  const int t = units(c.wall), cw = units(c.corridor_width), min_room = units(c.min_room);
  const double volume = c.length * c.width * c.height;
  if (volume < 50.0 || volume > 500.0) {
    std::ostringstream msg;
    msg << "world volume " << volume << " m^3 outside [50, 500]";
    throw ConfigError(msg.str());
  }
  if (c.rooms < 1) throw ConfigError("rooms: at least one room is required");
  if (H < 20) throw ConfigError("height: at least 2.0 m is required");
  const int door_lo = int(std::ceil(c.door_min / res - 1e-9)), door_hi = int(std::floor(c.door_max / res + 1e-9));
  if (door_lo > door_hi || door_lo <= 0) throw ConfigError("door width bounds are empty");

  std::mt19937_64 rng(seed);
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const int south_n = (c.rooms + 1) / 2, north_n = c.rooms / 2;
  const int sides = north_n > 0 ? 2 : 1;
  const int avail = W - 2 * t - cw - sides * t;
  const int depth = avail / sides;
  if (depth < min_room) {
    std::ostringstream msg;
    msg << "width: room depth " << depth * res << " m is below min_room " << c.min_room << " m";
    throw ConfigError(msg.str());
  }

  const int ys0 = t, ys1 = t + depth;  // south rooms
  const int yc0 = ys1 + t;             // corridor
  const int yc1 = north_n > 0 ? yc0 + cw + (avail - sides * depth) : W - t;
  const int yn0 = yc1 + t, yn1 = W - t;  // north rooms

  std::vector<IBox> boxes;
  boxes.push_back({0, 0, 0, L, W, 1});
  boxes.push_back({0, 0, H - 1, L, W, H});
  boxes.push_back({0, 0, 0, t, W, H});
  boxes.push_back({L - t, 0, 0, L, W, H});
  boxes.push_back({0, 0, 0, L, t, H});
  boxes.push_back({0, W - t, 0, L, W, H});

  World w;
  w.seed = seed;
  w.resolution = res;
  w.bounds = {Vec3::Zero(), Vec3(L * res, W * res, H * res)};
  w.corridor = {Vec2(t * res, yc0 * res), Vec2((L - t) * res, yc1 * res)};

  auto build_side = [&](int n, int ry0, int ry1, int wall_y0, int wall_y1, bool south) {
    if (n == 0) return;
    const int inner = L - 2 * t - (n - 1) * t;
    std::vector<double> weights(static_cast<size_t>(n));
    double sum = 0.0;
    for (auto& x : weights) {
      x = uniform(0.8, 1.2);
      sum += x;
    }
    std::vector<int> widths(static_cast<size_t>(n));
    int used = 0;
    for (int i = 0; i + 1 < n; ++i) {
      widths[size_t(i)] = int(std::floor(inner * weights[size_t(i)] / sum));
      used += widths[size_t(i)];
    }
    widths[size_t(n - 1)] = inner - used;
    for (int wu : widths)
      if (wu < min_room) {
        std::ostringstream msg;
        msg << "length: room width " << wu * res << " m is below min_room " << c.min_room << " m";
        throw ConfigError(msg.str());
      }

    std::vector<std::pair<int, int>> gaps;
    int x = t;
    for (int i = 0; i < n; ++i) {
      const int x0 = x, x1 = x + widths[size_t(i)];
      w.rooms.push_back({Vec2(x0 * res, ry0 * res), Vec2(x1 * res, ry1 * res)});
      const int dw = uniform_int(door_lo, door_hi);
      const int lo = x0 + 3, hi = x1 - 3 - dw;
      if (hi < lo) throw ConfigError("length: room too narrow for its door");
      const int left = uniform_int(lo, hi);
      gaps.push_back({left, left + dw});
      Door d;
      d.center = Vec2((left + 0.5 * dw) * res, 0.5 * (wall_y0 + wall_y1) * res);
      d.normal = south ? Vec2(0, -1) : Vec2(0, 1);
      d.width = dw * res;
      w.doors.push_back(d);

      for (int k = 0; k < c.obstacles_per_room; ++k) {
        const int sx = 6, sy = 6, sz = 8;
        const int ox0 = uniform_int(x0 + 6, std::max(x0 + 6, x1 - 6 - sx));
        const int oy0 = uniform_int(ry0 + 6, std::max(ry0 + 6, ry1 - 6 - sy));
        const double dx = (ox0 + sx / 2.0) * res - d.center.x(), dy = (oy0 + sy / 2.0) * res - d.center.y();
        if (std::hypot(dx, dy) < 1.5) continue;
        boxes.push_back({ox0, oy0, 1, ox0 + sx, oy0 + sy, 1 + sz});
      }

      if (i + 1 < n) boxes.push_back({x1, ry0, 0, x1 + t, ry1, H});
      x = x1 + t;
    }
    int wx = t;
    for (auto [g0, g1] : gaps) {
      if (g0 > wx) boxes.push_back({wx, wall_y0, 0, g0, wall_y1, H});
      wx = g1;
    }
    if (L - t > wx) boxes.push_back({wx, wall_y0, 0, L - t, wall_y1, H});
  };

  build_side(south_n, ys0, ys1, ys1, yc0, true);
  build_side(north_n, yn0, yn1, yc1, yn0, false);

  for (const auto& b : boxes)
    w.boxes.push_back({Vec3(b.x0, b.y0, b.z0) * res, Vec3(b.x1, b.y1, b.z1) * res});

  const int ymid = (yc0 + yc1) / 2;
  w.start.p = Vec3((t + 10.5) * res, (ymid + 0.5) * res, c.flight_height);
  w.start.yaw = 0.0;
  return w;
}

std::string world_to_text(const World& w) {
  std::string out;
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
  };
  line("SEED %llu\n", static_cast<unsigned long long>(w.seed));
  line("BOUNDS %.4f %.4f %.4f %.4f %.4f %.4f\n", w.bounds.min.x(), w.bounds.min.y(), w.bounds.min.z(), w.bounds.max.x(),
       w.bounds.max.y(), w.bounds.max.z());
  line("RESOLUTION %.4f\n", w.resolution);
  line("START %.4f %.4f %.4f %.4f\n", w.start.p.x(), w.start.p.y(), w.start.p.z(), w.start.yaw);
  line("CORRIDOR %.4f %.4f %.4f %.4f\n", w.corridor.min.x(), w.corridor.min.y(), w.corridor.max.x(), w.corridor.max.y());
  for (const auto& r : w.rooms) line("ROOM %.4f %.4f %.4f %.4f\n", r.min.x(), r.min.y(), r.max.x(), r.max.y());
  for (const auto& d : w.doors)
    line("DOOR %.4f %.4f %.4f %.4f %.4f\n", d.center.x(), d.center.y(), d.normal.x(), d.normal.y(), d.width);
  for (const auto& b : w.boxes)
    line("BOX %.4f %.4f %.4f %.4f %.4f %.4f\n", b.min.x(), b.min.y(), b.min.z(), b.max.x(), b.max.y(), b.max.z());
  return out;
}

World world_from_text(const std::string& text) {
  World w;
  bool have_bounds = false;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&] { throw ConfigError("world file line " + std::to_string(lineno) + ": malformed " + tag); };
    if (tag == "SEED") {
      unsigned long long s = 0;
      if (!(ls >> s)) fail();
      w.seed = s;
    } else if (tag == "BOUNDS") {
      if (!(ls >> w.bounds.min.x() >> w.bounds.min.y() >> w.bounds.min.z() >> w.bounds.max.x() >> w.bounds.max.y() >>
            w.bounds.max.z()))
        fail();
      have_bounds = true;
    } else if (tag == "RESOLUTION") {
      if (!(ls >> w.resolution) || w.resolution <= 0) fail();
    } else if (tag == "START") {
      if (!(ls >> w.start.p.x() >> w.start.p.y() >> w.start.p.z() >> w.start.yaw)) fail();
    } else if (tag == "CORRIDOR") {
      if (!(ls >> w.corridor.min.x() >> w.corridor.min.y() >> w.corridor.max.x() >> w.corridor.max.y())) fail();
    } else if (tag == "ROOM") {
      Room r;
      if (!(ls >> r.min.x() >> r.min.y() >> r.max.x() >> r.max.y())) fail();
      w.rooms.push_back(r);
    } else if (tag == "DOOR") {
      Door d;
      if (!(ls >> d.center.x() >> d.center.y() >> d.normal.x() >> d.normal.y() >> d.width)) fail();
      w.doors.push_back(d);
    } else if (tag == "BOX") {
      Box b;
      if (!(ls >> b.min.x() >> b.min.y() >> b.min.z() >> b.max.x() >> b.max.y() >> b.max.z())) fail();
      w.boxes.push_back(b);
    } else {
      throw ConfigError("world file line " + std::to_string(lineno) + ": unknown record " + tag);
    }
  }
  if (!have_bounds) throw ConfigError("world file has no BOUNDS record");
  return w;
}

void save_world(const std::string& path, const World& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeFailure("cannot write world file " + path);
  os << world_to_text(w);
}

World load_world(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open world file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return world_from_text(ss.str());
}

VoxelMap make_map(const World& w, const MapParams& params) { return VoxelMap(w.bounds.min, w.resolution, w.dims(), params); }

GroundTruth::GroundTruth(const World& w) : dims_(w.dims()), origin_(w.bounds.min), resolution_(w.resolution) {
  grid_.assign(size_t(dims_.prod()), kFree);
  for (const auto& b : w.boxes) {
    Vec3i lo, hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, int(std::ceil((b.min[a] - origin_[a]) / resolution_ - 0.5 - 1e-9)));
      hi[a] = std::min(dims_[a] - 1, int(std::floor((b.max[a] - origin_[a]) / resolution_ - 0.5 + 1e-9)));
    }
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x) grid_[linear(Vec3i(x, y, z))] = kOccupied;
  }
  observable_.assign(grid_.size(), 0);
  static const int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int z = 0; z < dims_.z(); ++z)
    for (int y = 0; y < dims_.y(); ++y)
      for (int x = 0; x < dims_.x(); ++x) {
        const Vec3i v(x, y, z);
        const size_t i = linear(v);
        bool obs = grid_[i] == kFree;
        for (int k = 0; k < 6 && !obs; ++k) {
          const Vec3i n = v + Vec3i(nb[k][0], nb[k][1], nb[k][2]);
          if ((n.array() < 0).any() || (n.array() >= dims_.array()).any()) continue;
          obs = grid_[linear(n)] == kFree;
        }
        if (obs) {
          observable_[i] = 1;
          observable_list_.push_back(uint32_t(i));
        }
      }
  observable_count_ = observable_list_.size();
}

void CameraModel::validate() const {
  if (!(hfov > 0 && hfov < kPi)) throw ConfigError("camera horizontal FOV must lie in (0, pi)");
  if (!(vfov > 0 && vfov < kPi)) throw ConfigError("camera vertical FOV must lie in (0, pi)");
  if (!(max_range > 0)) throw ConfigError("camera max range must be positive");
  if (rows <= 0 || cols <= 0) throw ConfigError("camera ray grid must be nonempty");
}

Vec3 CameraModel::direction(double yaw, int row, int col) const {
  const double az = yaw - 0.5 * hfov + (col + 0.5) * hfov / cols;
  const double el = -0.5 * vfov + (row + 0.5) * vfov / rows;
  return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

double first_hit(const World& world, const Vec3& o, const Vec3& d) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : world.boxes) {
    double t0 = 0.0, t1 = best;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (d[a] == 0.0) {
        if (o[a] < b.min[a] || o[a] > b.max[a]) miss = true;
        continue;
      }
      double ta = (b.min[a] - o[a]) / d[a], tb = (b.max[a] - o[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) miss = true;
    }
    if (!miss) best = std::min(best, t0);
  }
  return best;
}

std::vector<RayEndpoint> render_depth(const World& world, const Pose& pose, const CameraModel& camera, Exec exec) {
  const int n = camera.rows * camera.cols;
  std::vector<RayEndpoint> out(static_cast<size_t>(n));
  // Hits are pushed slightly past the surface so the endpoint voxel is the solid one.
  constexpr double kPush = 1e-4;
  auto cast = [&](int i) {
    const Vec3 d = camera.direction(pose.yaw, i / camera.cols, i % camera.cols);
    const double t = first_hit(world, pose.p, d);
    if (t <= camera.max_range) {
      out[size_t(i)] = {pose.p + (t + kPush) * d, true};
    } else {
      out[size_t(i)] = {pose.p + camera.max_range * d, false};
    }
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) cast(i);
  } else {
    for (int i = 0; i < n; ++i) cast(i);
  }
  return out;
}

double coverage(const VoxelMap& map, const GroundTruth& gt) {
  if (map.dims() != gt.dims() || std::abs(map.resolution() - gt.resolution()) > 1e-12 ||
      (map.origin() - gt.origin()).norm() > 1e-9)
    throw ConfigError("coverage: map and world bounds differ");
  if (gt.observable_count() == 0) return 1.0;
  size_t known = 0;
  for (uint32_t i : gt.observable_indices())
    if (map.trinary_at(i) != kUnknown) ++known;
  return double(known) / double(gt.observable_count());
}

}  // namespace explore

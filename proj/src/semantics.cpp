#include <explore/semantics.hpp>

#include <opencv2/imgproc.hpp>

#include <deque>

namespace explore {

const char* mode_name(BgsmMode m) {
  switch (m) {
    case BgsmMode::kCorridorExplore: return "CorridorExplore";
    case BgsmMode::kNavigateToSoi: return "NavigateToSOI";
    case BgsmMode::kConfirmSoi: return "ConfirmSOI";
    case BgsmMode::kEnterAoi: return "EnterAOI";
    case BgsmMode::kExploreAoi: return "ExploreAOI";
    case BgsmMode::kExitAoi: return "ExitAOI";
    case BgsmMode::kDone: return "Done";
  }
  return "?";
}

const char* status_name(SoiStatus s) {
  switch (s) {
    case SoiStatus::kToBeConfirmed: return "to_be_confirmed";
    case SoiStatus::kConfirmed: return "confirmed";
    case SoiStatus::kRejected: return "rejected";
  }
  return "?";
}

namespace {

struct ZBand {
  int lo, hi;
};

ZBand band(const VoxelMap& map, double z_lo, double z_hi) {
  const double res = map.resolution();
  return {std::max(0, int(std::floor((z_lo - map.origin().z()) / res))),
          std::min(map.dims().z() - 1, int(std::floor((z_hi - map.origin().z()) / res)))};
}

bool occupied_column(const VoxelMap& map, int x, int y, const ZBand& b) {
  for (int z = b.lo; z <= b.hi; ++z)
    if (map.is_occupied(Vec3i(x, y, z))) return true;
  return false;
}

double free_height(const VoxelMap& map, int x, int y) {
  int best = 0, run = 0;
  for (int z = 0; z < map.dims().z(); ++z) {
    if (map.is_free(Vec3i(x, y, z))) {
      best = std::max(best, ++run);
    } else {
      run = 0;
    }
  }
  return best * map.resolution();
}

Eigen::Vector2i column_of(const VoxelMap& map, const Vec2& p) {
  const double res = map.resolution();
  return Eigen::Vector2i(int(std::floor((p.x() - map.origin().x()) / res)), int(std::floor((p.y() - map.origin().y()) / res)));
}

}  // namespace

DoorCheck check_door(const VoxelMap& map, const Vec2& center, const Vec2& normal, const DoorParams& P) {
  DoorCheck out;
  const double res = map.resolution();
  const Vec2 n = normal.normalized();
  const Vec2 d(-n.y(), n.x());
  const ZBand b = band(map, P.z_lo, P.z_hi);
  const int reach = int(std::ceil((P.w_max + 0.3) / res));
  auto in_xy = [&](const Eigen::Vector2i& c) {
    return c.x() >= 0 && c.y() >= 0 && c.x() < map.dims().x() && c.y() < map.dims().y();
  };
  // first occupied column along +dir / -dir, in steps
  auto flank = [&](const Vec2& q, double sign) {
    for (int k = 1; k <= reach; ++k) {
      const auto c = column_of(map, q + sign * k * res * d);
      if (!in_xy(c)) return -1;
      if (occupied_column(map, c.x(), c.y(), b)) return k;
    }
    return -1;
  };
  for (int s : {0, 1, -1, 2, -2, 3, -3}) {
    const Vec2 q = center + s * res * n;
    const auto c0 = column_of(map, q);
    if (!in_xy(c0) || occupied_column(map, c0.x(), c0.y(), b)) continue;
    const int kp = flank(q, 1.0), km = flank(q, -1.0);
    if (kp < 0 || km < 0) continue;
    const double span = (kp + km - 1) * res;
    if (span < P.w_min - 1e-6 || span > P.w_max + 1e-6) continue;
    // an unobserved stretch of wall is not an opening
    const int zf = std::clamp(int(std::floor((P.flight_height - map.origin().z()) / res)), 0, map.dims().z() - 1);
    bool open = true;
    for (int k = 1 - km; k < kp && open; ++k) {
      const auto c = column_of(map, q + k * res * d);
      open = in_xy(c) && map.is_free(Vec3i(c.x(), c.y(), zf));
    }
    if (!open) continue;
    const Vec2 mid = q + 0.5 * (kp - km) * res * d;
    const auto cm = column_of(map, mid + 1e-6 * d);
    if (!in_xy(cm)) continue;
    // a doorway is passable through the wall, not a strip running along it
    bool through = true;
    for (int k = -3; k <= 3 && through; ++k) {
      const auto c = column_of(map, mid + 1e-6 * d + k * res * n);
      through = in_xy(c) && !occupied_column(map, c.x(), c.y(), b);
    }
    if (!through) continue;
    const double h = free_height(map, cm.x(), cm.y());
    if (h < P.h_min - 1e-6) continue;
    out.ok = true;
    out.center = mid;
    out.span = span;
    out.free_height = h;
    return out;
  }
  return out;
}

std::vector<uint8_t> occupancy_slice(const VoxelMap& map, const Vec2& center, const DoorParams& P, int& width,
                                     int& height, Eigen::Vector2i& origin) {
  const double res = map.resolution();
  const int half = int(std::lround(0.5 * P.window / res));
  const auto c = column_of(map, center);
  const int x0 = std::max(0, c.x() - half), x1 = std::min(map.dims().x() - 1, c.x() + half);
  const int y0 = std::max(0, c.y() - half), y1 = std::min(map.dims().y() - 1, c.y() + half);
  width = std::max(0, x1 - x0 + 1);
  height = std::max(0, y1 - y0 + 1);
  origin = Eigen::Vector2i(x0, y0);
  std::vector<uint8_t> img(size_t(width) * size_t(height), 0);
  const ZBand b = band(map, P.z_lo, P.z_hi);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (occupied_column(map, x0 + x, y0 + y, b)) img[size_t(y) * size_t(width) + size_t(x)] = 255;
  return img;
}

std::vector<SemanticObject> detect_doors(const VoxelMap& map, const FrontierCluster& cluster, const DoorParams& P) {
  std::vector<SemanticObject> out;
  if (cluster.cells.empty()) return out;
  int w = 0, h = 0;
  Eigen::Vector2i org;
  auto pixels = occupancy_slice(map, cluster.centroid.head<2>(), P, w, h, org);
  if (w < 3 || h < 3) return out;
  cv::Mat img(h, w, CV_8U, pixels.data());

  cv::Mat gx, gy;
  cv::Sobel(img, gx, CV_32F, 1, 0, 3);
  cv::Sobel(img, gy, CV_32F, 0, 1, 3);
  cv::Mat mag = cv::abs(gx) + cv::abs(gy);
  double max_grad = 0.0;
  cv::minMaxLoc(mag, nullptr, &max_grad);
  if (max_grad <= 0.0) return out;
  cv::Mat edges;
  const double thr = P.edge_ratio * max_grad;
  cv::Canny(img, edges, thr, thr, 3);
  std::vector<cv::Vec4i> lines;
  cv::HoughLinesP(edges, lines, 1.0, kPi / 180.0, P.hough_votes, P.min_line_px, P.line_gap_px);

  const double res = map.resolution();
  auto to_metric = [&](int px, int py) {
    return Vec2(map.origin().x() + (org.x() + px + 0.5) * res, map.origin().y() + (org.y() + py + 0.5) * res);
  };
  struct Seg {
    Vec2 a, b, dir;
  };
  std::vector<Seg> segs;
  for (const auto& l : lines) {
    Seg s{to_metric(l[0], l[1]), to_metric(l[2], l[3]), Vec2::Zero()};
    const Vec2 d = s.b - s.a;
    if (d.norm() < 1e-9) continue;
    s.dir = d.normalized();
    segs.push_back(s);
  }

  std::vector<std::pair<Vec2, Vec2>> proposals;  // (center, normal)
  for (size_t i = 0; i < segs.size(); ++i)
    for (size_t j = i + 1; j < segs.size(); ++j) {
      const Seg& A = segs[i];
      const Seg& B = segs[j];
      const double cross = std::abs(A.dir.x() * B.dir.y() - A.dir.y() * B.dir.x());
      if (std::asin(std::min(1.0, cross)) > P.angle_tol) continue;
      const Vec2 n(-A.dir.y(), A.dir.x());
      if (std::abs((B.a - A.a).dot(n)) > P.collinear_tol_px * res || std::abs((B.b - A.a).dot(n)) > P.collinear_tol_px * res)
        continue;
      double a0 = 0.0, a1 = (A.b - A.a).dot(A.dir);
      double b0 = (B.a - A.a).dot(A.dir), b1 = (B.b - A.a).dot(A.dir);
      if (a0 > a1) std::swap(a0, a1);
      if (b0 > b1) std::swap(b0, b1);
      double lo, hi;
      if (b0 > a1) {
        lo = a1;
        hi = b0;
      } else if (a0 > b1) {
        lo = b1;
        hi = a0;
      } else {
        continue;
      }
      // pixel-center endpoints understate the opening by one voxel
      const double gap = hi - lo - res;
      if (gap < P.w_min - 2 * res || gap > P.w_max + 2 * res) continue;
      const double off = 0.5 * ((B.a - A.a).dot(n) + (B.b - A.a).dot(n)) * 0.5;
      proposals.emplace_back(A.a + 0.5 * (lo + hi) * A.dir + off * n, n);
    }
  // The probabilistic transform can fragment an edge so that no collinear pair
  // straddles the opening; probe just past every segment end as well.
  const double probe = res + 0.5 * P.w_min;
  for (const Seg& s : segs) {
    const Vec2 n(-s.dir.y(), s.dir.x());
    proposals.emplace_back(s.b + probe * s.dir, n);
    proposals.emplace_back(s.a - probe * s.dir, n);
  }

  for (const auto& [c, n] : proposals) {
    const DoorCheck chk = check_door(map, c, n, P);
    if (!chk.ok) continue;
    bool dup = false;
    for (const auto& o : out)
      if ((o.p.head<2>() - chk.center).norm() < P.dedup) dup = true;
    if (dup) continue;
    SemanticObject s;
    s.p = Vec3(chk.center.x(), chk.center.y(), P.flight_height);
    s.direction = n;
    s.width = chk.span;
    out.push_back(s);
  }
  return out;
}

std::vector<int> SemanticRegistry::add(const std::vector<SemanticObject>& candidates, const DoorParams& P) {
  std::vector<int> ids;
  for (const auto& c : candidates) {
    bool dup = false;
    for (const auto& o : objects_)
      if ((o.p.head<2>() - c.p.head<2>()).norm() < P.dedup) dup = true;
    if (dup) continue;
    SemanticObject s = c;
    s.id = next_id_++;
    s.status = SoiStatus::kToBeConfirmed;
    objects_.push_back(s);
    ids.push_back(s.id);
  }
  return ids;
}

std::vector<int> SemanticRegistry::recheck(const VoxelMap& map, const DoorParams& P) {
  std::vector<int> removed;
  std::vector<SemanticObject> kept;
  for (const auto& o : objects_) {
    if (o.status == SoiStatus::kToBeConfirmed && !check_door(map, o.p.head<2>(), o.direction, P).ok) {
      removed.push_back(o.id);
      continue;
    }
    kept.push_back(o);
  }
  objects_ = std::move(kept);
  return removed;
}

SoiStatus SemanticRegistry::confirm(int id, const Pose& robot, const CameraModel& camera, const VoxelMap& map,
                                    const DoorParams& P) {
  SemanticObject* o = find(id);
  if (!o) throw RuntimeFailure("confirm: unknown semantic object " + std::to_string(id));
  if (o->status != SoiStatus::kToBeConfirmed) return o->status;
  const Vec2 to = o->p.head<2>() - robot.p.head<2>();
  const bool near = to.norm() <= P.confirm_distance;
  const bool in_fov = angle_dist(std::atan2(to.y(), to.x()), robot.yaw) <= 0.5 * camera.hfov;
  const DoorCheck chk = check_door(map, o->p.head<2>(), o->direction, P);
  if (near && in_fov && chk.ok) {
    o->status = SoiStatus::kConfirmed;
    if (o->direction.dot(to) < 0) o->direction = -o->direction;
  } else {
    o->status = SoiStatus::kRejected;
  }
  return o->status;
}

const SemanticObject* SemanticRegistry::find(int id) const {
  for (const auto& o : objects_)
    if (o.id == id) return &o;
  return nullptr;
}

SemanticObject* SemanticRegistry::find(int id) {
  for (auto& o : objects_)
    if (o.id == id) return &o;
  return nullptr;
}

std::vector<uint8_t> same_room_mask(const VoxelMap& map, const Vec3& from, const SemanticRegistry& registry) {
  std::vector<uint8_t> mask(map.voxel_count(), 0);
  std::vector<const SemanticObject*> doors;
  for (const auto& o : registry.objects())
    if (o.status == SoiStatus::kConfirmed) doors.push_back(&o);
  const double res = map.resolution();
  auto blocked = [&](const Vec3i& v) {
    const Vec2 q = map.center(v).head<2>();
    for (const auto* o : doors) {
      const Vec2 n = o->direction;
      const Vec2 d(-n.y(), n.x());
      const Vec2 r = q - o->p.head<2>();
      if (std::abs(r.dot(n)) <= 1.5 * res && std::abs(r.dot(d)) <= 0.5 * o->width + 2 * res) return true;
    }
    return false;
  };
  const Vec3i s = map.to_index(from);
  if (!map.in_map(s)) return mask;
  std::deque<Vec3i> q{s};
  mask[map.linear(s)] = 1;
  static const Vec3i nb[6] = {Vec3i(1, 0, 0), Vec3i(-1, 0, 0), Vec3i(0, 1, 0), Vec3i(0, -1, 0), Vec3i(0, 0, 1), Vec3i(0, 0, -1)};
  while (!q.empty()) {
    const Vec3i v = q.front();
    q.pop_front();
    for (const auto& o : nb) {
      const Vec3i n = v + o;
      if (!map.is_free(n)) continue;
      const size_t i = map.linear(n);
      if (mask[i] || blocked(n)) continue;
      mask[i] = 1;
      q.push_back(n);
    }
  }
  return mask;
}

FrontierLabel classify_frontier(const FrontierCluster& cluster, BgsmMode mode, const std::vector<uint8_t>& room_mask,
                                const VoxelMap& map) {
  if (mode != BgsmMode::kEnterAoi && mode != BgsmMode::kExploreAoi) return FrontierLabel::kCorridor;
  for (const auto& c : cluster.cells)
    if (room_mask[map.linear(c)]) return FrontierLabel::kRoom;
  return FrontierLabel::kCorridor;
}

FrontierLabel classify_frontier(const FrontierCluster& cluster, BgsmMode mode, const Vec3& robot,
                                const SemanticRegistry& registry, const VoxelMap& map) {
  if (mode != BgsmMode::kEnterAoi && mode != BgsmMode::kExploreAoi) return FrontierLabel::kCorridor;
  return classify_frontier(cluster, mode, same_room_mask(map, robot, registry), map);
}

}  // namespace explore

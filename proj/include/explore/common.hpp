#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace explore {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;

/// Trinary occupancy values shared by maps, blocks and predictions.
enum Occ : int8_t { kUnknown = -1, kFree = 0, kOccupied = 1 };

/// Selects the serial reference path or the OpenMP path of a kernel.
enum class Exec { kSerial, kParallel };

/// Bad user-supplied configuration or input file (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running an otherwise valid request (CLI exit code 3).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inclusive integer voxel box. An empty box has min > max on some axis.
struct Aabb {
  Vec3i min{Vec3i::Constant(std::numeric_limits<int>::max())};
  Vec3i max{Vec3i::Constant(std::numeric_limits<int>::min())};

  static Aabb of(const Vec3i& lo, const Vec3i& hi) {
    Aabb b;
    b.min = lo;
    b.max = hi;
    return b;
  }

  bool empty() const { return (min.array() > max.array()).any(); }

  void extend(const Vec3i& v) {
    min = min.cwiseMin(v);
    max = max.cwiseMax(v);
  }

  void extend(const Aabb& o) {
    if (o.empty()) return;
    extend(o.min);
    extend(o.max);
  }

  bool contains(const Vec3i& v) const {
    return (v.array() >= min.array()).all() && (v.array() <= max.array()).all();
  }

  bool intersects(const Aabb& o) const {
    if (empty() || o.empty()) return false;
    return (min.array() <= o.max.array()).all() && (o.min.array() <= max.array()).all();
  }

  Aabb dilated(int r) const {
    if (empty()) return *this;
    return of(min.array() - r, max.array() + r);
  }

  Aabb clipped(const Vec3i& dims) const {
    if (empty()) return *this;
    Aabb b = of(min.cwiseMax(Vec3i::Zero()), max.cwiseMin(dims - Vec3i::Ones()));
    return b;
  }

  long volume() const {
    if (empty()) return 0;
    Vec3i e = max - min + Vec3i::Ones();
    return long(e.x()) * e.y() * e.z();
  }
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

inline double angle_dist(double a, double b) { return std::abs(wrap_angle(a - b)); }

/// Planar pose of the robot body: position plus heading.
struct Pose {
  Vec3 p{Vec3::Zero()};
  double yaw = 0.0;
};

}  // namespace explore

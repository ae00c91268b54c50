#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace skelgen {

using Vec3 = Eigen::Vector3d;

/// Bad user input: unreadable files, malformed records, invalid parameters,
/// queries issued from occupied space.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric construction failed (degenerate hull input, zero-length projection).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A planning query has no answer (attachment failed, goal unreachable).
class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box. An empty box has min > max.
struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  [[nodiscard]] bool empty() const { return (min.array() > max.array()).any(); }

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  void extend(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }

  [[nodiscard]] bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  [[nodiscard]] Vec3 center() const { return 0.5 * (min + max); }
  [[nodiscard]] Vec3 extent() const { return max - min; }

  /// Slab test. Returns the entry parameter of the ray into the box when the
  /// overlap interval intersects [t_min, t_max].
  [[nodiscard]] bool intersects_ray(const Vec3& origin, const Vec3& dir, double t_min,
                                    double t_max) const {
    for (int axis = 0; axis < 3; ++axis) {
      if (dir[axis] == 0.0) {
        if (origin[axis] < min[axis] || origin[axis] > max[axis]) return false;
        continue;
      }
      const double inv = 1.0 / dir[axis];
      double t0 = (min[axis] - origin[axis]) * inv;
      double t1 = (max[axis] - origin[axis]) * inv;
      if (t0 > t1) std::swap(t0, t1);
      t_min = std::max(t_min, t0);
      t_max = std::min(t_max, t1);
      if (t_min > t_max) return false;
    }
    return true;
  }
};

}  // namespace skelgen

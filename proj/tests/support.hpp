#pragma once

#include <skelgen/geometry.hpp>
#include <skelgen/graph.hpp>
#include <skelgen/map.hpp>
#include <skelgen/skeleton.hpp>
#include <skelgen/worldgen.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace skelgen::test {

inline Aabb make_box(const Vec3& lo, const Vec3& hi) {
  Aabb b;
  b.min = lo;
  b.max = hi;
  return b;
}

/// Points on a lattice of the rectangle spanned from `origin` along `u` and `v`.
inline void sample_rect(std::vector<Vec3>& out, const Vec3& origin, const Vec3& u, const Vec3& v,
                        double pitch) {
  const int nu = std::max(1, static_cast<int>(std::ceil(u.norm() / pitch)));
  const int nv = std::max(1, static_cast<int>(std::ceil(v.norm() / pitch)));
  for (int i = 0; i <= nu; ++i)
    for (int j = 0; j <= nv; ++j) out.push_back(origin + u * (double(i) / nu) + v * (double(j) / nv));
}

/// Inner surface of a closed room [lo, hi].
inline std::vector<Vec3> room_points(const Vec3& lo, const Vec3& hi, double pitch = 0.1) {
  std::vector<Vec3> pts;
  const Vec3 e = hi - lo;
  const Vec3 ex(e.x(), 0, 0);
  const Vec3 ey(0, e.y(), 0);
  const Vec3 ez(0, 0, e.z());
  sample_rect(pts, lo, ex, ey, pitch);
  sample_rect(pts, lo + ez, ex, ey, pitch);
  sample_rect(pts, lo, ex, ez, pitch);
  sample_rect(pts, lo + ey, ex, ez, pitch);
  sample_rect(pts, lo, ey, ez, pitch);
  sample_rect(pts, lo + ex, ey, ez, pitch);
  return pts;
}

inline PointCloudMap room_map(const Vec3& lo, const Vec3& hi, double clearance = 0.3) {
  return PointCloudMap(room_points(lo, hi), make_box(lo, hi), clearance);
}

inline double brute_min_distance(const std::vector<Vec3>& pts, const Vec3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, (p - q).norm());
  return best;
}

inline Vec3 random_in(std::mt19937_64& rng, const Aabb& b) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Vec3(b.min.x() + u(rng) * (b.max.x() - b.min.x()), b.min.y() + u(rng) * (b.max.y() - b.min.y()),
              b.min.z() + u(rng) * (b.max.z() - b.min.z()));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-6) return v.normalized();
  }
}

/// Every vertex free and every edge sampled at the march step free.
inline bool graph_is_safe(const SkeletonGraph& g, const CollisionOracle& map) {
  for (const auto& v : g.vertices())
    if (!map.is_free(v.position)) return false;
  const double step = map.march_step();
  for (const auto& e : g.edges()) {
    const Vec3 a = g.vertex(e.a).position;
    const Vec3 b = g.vertex(e.b).position;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int i = 0; i <= n; ++i)
      if (!map.is_free(a + (b - a) * (double(i) / n))) return false;
  }
  return true;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("skelgen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace skelgen::test

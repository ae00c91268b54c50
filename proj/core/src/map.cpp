#include <skelgen/map.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace skelgen {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr std::size_t kMaxIndexCells = std::size_t{1} << 24;

double squared_distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).squaredNorm();
}

// Calls visit(sample, reach) at spacing h along ab; every point within r of
// the segment lies within reach of some sample.
template <typename Visit>
bool sweep_segment(const Vec3& a, const Vec3& b, double h, double r, Visit&& visit) {
  const double length = (b - a).norm();
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(length / h)));
  const double reach = r + 0.5 * length / static_cast<double>(n);
  for (long i = 0; i <= n; ++i)
    if (visit(a + (static_cast<double>(i) / static_cast<double>(n)) * (b - a), reach)) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// CollisionOracle

CollisionOracle::CollisionOracle(double clearance) : clearance_(clearance) {
  if (!(clearance > 0.0)) throw InputError("clearance must be positive");
}

std::optional<double> CollisionOracle::raycast_occupied(const Vec3& origin, const Vec3& dir,
                                                        double max_dist) const {
  if (std::abs(dir.norm() - 1.0) > kUnitTolerance)
    throw InputError("raycast direction must be unit length");
  if (!(max_dist > 0.0)) throw InputError("raycast max distance must be positive");
  if (!is_free(origin)) throw InputError("raycast from occupied space");
  return cast(origin, dir, max_dist);
}

std::optional<double> CollisionOracle::cast(const Vec3& origin, const Vec3& dir,
                                            double max_dist) const {
  const double step = march_step();
  const auto steps = static_cast<long>(std::floor(max_dist / step));
  for (long i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) * step;
    if (!is_free(origin + t * dir)) return t;
  }
  if (static_cast<double>(steps) * step < max_dist && !is_free(origin + max_dist * dir))
    return max_dist;
  return std::nullopt;
}

bool CollisionOracle::segment_free(const Vec3& a, const Vec3& b) const {
  if (!bounds().contains(a) || !bounds().contains(b)) return false;
  return segment_clear(a, b);
}

bool CollisionOracle::segment_clear(const Vec3& a, const Vec3& b) const {
  const double length = (b - a).norm();
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(length / march_step())));
  for (long i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n);
    if (!is_free(a + s * (b - a))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PointIndex

PointIndex::PointIndex(std::span<const Vec3> points, const Aabb& bounds, double cell_size)
    : origin_(bounds.empty() ? Vec3::Zero() : bounds.min), cell_size_(cell_size) {
  const Vec3 extent = bounds.empty() ? Vec3::Zero() : bounds.extent();
  auto compute_dims = [&] {
    for (int a = 0; a < 3; ++a)
      dims_[a] = static_cast<int>(std::floor(extent[a] / cell_size_)) + 1;
  };
  compute_dims();
  while (static_cast<std::size_t>(dims_.x()) * static_cast<std::size_t>(dims_.y()) *
             static_cast<std::size_t>(dims_.z()) >
         kMaxIndexCells) {
    cell_size_ *= 2.0;
    compute_dims();
  }

  const std::size_t cells = static_cast<std::size_t>(dims_.x()) *
                            static_cast<std::size_t>(dims_.y()) *
                            static_cast<std::size_t>(dims_.z());
  std::vector<std::uint32_t> cell_of(points.size());
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Eigen::Vector3i c;
    for (int a = 0; a < 3; ++a) {
      const int v = static_cast<int>(std::floor((points[i][a] - origin_[a]) / cell_size_));
      c[a] = std::clamp(v, 0, dims_[a] - 1);
    }
    const auto linear = static_cast<std::uint32_t>(
        c.x() + dims_.x() * (c.y() + dims_.y() * c.z()));
    cell_of[i] = linear;
    ++cell_start_[linear + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  order_.resize(points.size());
  std::vector<std::uint32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i)
    order_[cursor[cell_of[i]]++] = static_cast<std::uint32_t>(i);
}

template <typename Visit>
bool PointIndex::visit_cells(const Vec3& q, double radius, Visit&& visit) const {
  if (order_.empty()) return false;
  Eigen::Vector3i lo;
  Eigen::Vector3i hi;
  for (int a = 0; a < 3; ++a) {
    const double l = std::floor((q[a] - radius - origin_[a]) / cell_size_);
    const double h = std::floor((q[a] + radius - origin_[a]) / cell_size_);
    if (h < 0.0 || l > dims_[a] - 1) return false;
    lo[a] = static_cast<int>(std::max(l, 0.0));
    hi[a] = static_cast<int>(std::min(h, static_cast<double>(dims_[a] - 1)));
  }
  for (int z = lo.z(); z <= hi.z(); ++z) {
    for (int y = lo.y(); y <= hi.y(); ++y) {
      const std::size_t row = static_cast<std::size_t>(dims_.x()) *
                              (static_cast<std::size_t>(y) +
                               static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(z));
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const std::size_t cell = row + static_cast<std::size_t>(x);
        for (std::uint32_t k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k)
          if (visit(order_[k])) return true;
      }
    }
  }
  return false;
}

std::vector<std::size_t> PointIndex::radius_query(std::span<const Vec3> points, const Vec3& q,
                                                  double radius) const {
  std::vector<std::size_t> out;
  const double r2 = radius * radius;
  visit_cells(q, radius, [&](std::uint32_t i) {
    if ((points[i] - q).squaredNorm() <= r2) out.push_back(i);
    return false;
  });
  std::sort(out.begin(), out.end());
  return out;
}

bool PointIndex::any_within(std::span<const Vec3> points, const Vec3& q, double radius) const {
  const double r2 = radius * radius;
  return visit_cells(q, radius,
                     [&](std::uint32_t i) { return (points[i] - q).squaredNorm() <= r2; });
}

bool PointIndex::any_within_segment(std::span<const Vec3> points, const Vec3& a, const Vec3& b,
                                    double radius) const {
  const double r2 = radius * radius;
  return sweep_segment(a, b, cell_size_, radius, [&](const Vec3& q, double reach) {
    return visit_cells(q, reach, [&](std::uint32_t i) {
      return squared_distance_to_segment(points[i], a, b) <= r2;
    });
  });
}

// ---------------------------------------------------------------------------
// PointCloudMap

namespace {

Aabb tight_bounds(const std::vector<Vec3>& points) {
  if (points.empty()) throw InputError("empty cloud");
  Aabb box;
  for (const auto& p : points) box.extend(p);
  return box;
}

}  // namespace

PointCloudMap::PointCloudMap(std::vector<Vec3> points, double clearance)
    : PointCloudMap(points, tight_bounds(points), clearance) {}

PointCloudMap::PointCloudMap(std::vector<Vec3> points, const Aabb& bounds, double clearance)
    : CollisionOracle(clearance), points_(std::move(points)), bounds_(bounds) {
  if (bounds_.empty()) throw InputError("map bounds are empty");
  for (const auto& p : points_) {
    if (!p.allFinite()) throw InputError("non-finite point in cloud");
    if (!bounds_.contains(p)) throw InputError("cloud point outside map bounds");
  }
  index_ = PointIndex(points_, bounds_, clearance);
}

bool PointCloudMap::is_free(const Vec3& q) const {
  if (!bounds_.contains(q)) return false;
  return !index_.any_within(points_, q, clearance());
}

bool PointCloudMap::segment_clear(const Vec3& a, const Vec3& b) const {
  return !index_.any_within_segment(points_, a, b, clearance());
}

// ---------------------------------------------------------------------------
// OccupancyGridMap

OccupancyGridMap::OccupancyGridMap(const Vec3& origin, double voxel_size,
                                   const Eigen::Vector3i& dims,
                                   std::vector<std::uint8_t> occupancy, double clearance)
    : CollisionOracle(clearance),
      origin_(origin),
      voxel_size_(voxel_size),
      dims_(dims),
      occupancy_(std::move(occupancy)) {
  if (!(voxel_size > 0.0)) throw InputError("voxel_size must be positive");
  if ((dims.array() < 1).any()) throw InputError("grid dimensions must be >= 1");
  const std::size_t expected = static_cast<std::size_t>(dims.x()) *
                               static_cast<std::size_t>(dims.y()) *
                               static_cast<std::size_t>(dims.z());
  if (occupancy_.size() != expected) throw InputError("occupancy size does not match dims");
  bounds_.min = origin_;
  bounds_.max = origin_ + voxel_size_ * dims_.cast<double>();

  // Neighbor offsets whose centers are within clearance.
  const int reach = static_cast<int>(std::floor(clearance / voxel_size_));
  std::vector<Eigen::Vector3i> offsets;
  for (int dz = -reach; dz <= reach; ++dz)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx)
        if (voxel_size_ * voxel_size_ * (dx * dx + dy * dy + dz * dz) <= clearance * clearance)
          offsets.emplace_back(dx, dy, dz);

  traversable_.assign(expected, 1);
  for (int z = 0; z < dims_.z(); ++z)
    for (int y = 0; y < dims_.y(); ++y)
      for (int x = 0; x < dims_.x(); ++x) {
        const Eigen::Vector3i v(x, y, z);
        if (!occupancy_[linear_index(v)]) continue;
        for (const auto& o : offsets) {
          const Eigen::Vector3i n = v + o;
          if (in_grid(n)) traversable_[linear_index(n)] = 0;
        }
      }
}

double OccupancyGridMap::march_step() const { return 0.5 * std::min(clearance(), voxel_size_); }

Eigen::Vector3i OccupancyGridMap::voxel_of(const Vec3& q) const {
  Eigen::Vector3i v;
  for (int a = 0; a < 3; ++a) {
    const int i = static_cast<int>(std::floor((q[a] - origin_[a]) / voxel_size_));
    // Points on the max face belong to the last voxel.
    v[a] = (i == dims_[a] && q[a] <= bounds_.max[a]) ? dims_[a] - 1 : i;
  }
  return v;
}

Vec3 OccupancyGridMap::voxel_center(const Eigen::Vector3i& v) const {
  return origin_ + voxel_size_ * (v.cast<double>() + Vec3::Constant(0.5));
}

bool OccupancyGridMap::is_free(const Vec3& q) const {
  if (!bounds_.contains(q)) return false;
  const double c = clearance();
  Eigen::Vector3i lo;
  Eigen::Vector3i hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::ceil((q[a] - c - origin_[a]) / voxel_size_ - 0.5)));
    hi[a] = std::min(dims_[a] - 1,
                     static_cast<int>(std::floor((q[a] + c - origin_[a]) / voxel_size_ - 0.5)));
  }
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Eigen::Vector3i v(x, y, z);
        if (occupied(v) && (voxel_center(v) - q).squaredNorm() <= c * c) return false;
      }
  return true;
}

bool OccupancyGridMap::segment_clear(const Vec3& a, const Vec3& b) const {
  const double c = clearance();
  const double c2 = c * c;
  return !sweep_segment(a, b, voxel_size_, c, [&](const Vec3& q, double reach) {
    Eigen::Vector3i lo;
    Eigen::Vector3i hi;
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::max(0, static_cast<int>(std::ceil((q[k] - reach - origin_[k]) / voxel_size_ - 0.5)));
      hi[k] = std::min(dims_[k] - 1,
                       static_cast<int>(std::floor((q[k] + reach - origin_[k]) / voxel_size_ - 0.5)));
    }
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x) {
          const Eigen::Vector3i v(x, y, z);
          if (occupied(v) && squared_distance_to_segment(voxel_center(v), a, b) <= c2) return true;
        }
    return false;
  });
}

std::optional<double> OccupancyGridMap::cast(const Vec3& origin, const Vec3& dir,
                                             double max_dist) const {
  // First contact with a clearance sphere around an occupied voxel center,
  // scanned in one-voxel chunks along the ray. Leaving the bounds counts as a hit.
  const double c = clearance();
  const double c2 = c * c;
  double exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) exit = std::min(exit, (bounds_.max[a] - origin[a]) / dir[a]);
    if (dir[a] < 0.0) exit = std::min(exit, (bounds_.min[a] - origin[a]) / dir[a]);
  }
  const double limit = std::min(max_dist, exit);
  for (double t0 = 0.0; t0 < limit; t0 += voxel_size_) {
    const double t1 = std::min(t0 + voxel_size_, limit);
    const Vec3 a = origin + t0 * dir;
    const Vec3 b = origin + t1 * dir;
    Eigen::Vector3i lo;
    Eigen::Vector3i hi;
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::max(0, static_cast<int>(std::ceil((std::min(a[k], b[k]) - c - origin_[k]) / voxel_size_ - 0.5)));
      hi[k] = std::min(dims_[k] - 1,
                       static_cast<int>(std::floor((std::max(a[k], b[k]) + c - origin_[k]) / voxel_size_ - 0.5)));
    }
    double best = std::numeric_limits<double>::infinity();
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x) {
          const Eigen::Vector3i v(x, y, z);
          if (!occupied(v)) continue;
          const Vec3 w = voxel_center(v) - origin;
          const double tc = w.dot(dir);
          const double disc = c2 - (w.squaredNorm() - tc * tc);
          if (disc < 0.0) continue;
          const double te = tc - std::sqrt(disc);
          if (te > 0.0) best = std::min(best, te);
        }
    if (best <= t1) return best;
  }
  if (exit <= max_dist) return exit;
  return std::nullopt;
}

}  // namespace skelgen

#pragma once

#include <skelgen/types.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace skelgen {

/// Uniform collision-checking contract. Everything downstream (raycasting,
/// skeleton generation, planning) talks to the environment only through this.
///
/// Implementations are immutable after construction; every query is const and
/// safe to call concurrently.
class CollisionOracle {
 public:
  explicit CollisionOracle(double clearance);
  virtual ~CollisionOracle() = default;

  CollisionOracle(const CollisionOracle&) = default;
  CollisionOracle& operator=(const CollisionOracle&) = default;
  CollisionOracle(CollisionOracle&&) = default;
  CollisionOracle& operator=(CollisionOracle&&) = default;

  /// Robot radius used for every freeness test.
  [[nodiscard]] double clearance() const { return clearance_; }

  /// Sampling step for ray marching and segment checks.
  [[nodiscard]] virtual double march_step() const { return 0.5 * clearance_; }

  [[nodiscard]] virtual const Aabb& bounds() const = 0;

  /// True iff q is inside bounds and no obstacle lies within clearance of q.
  [[nodiscard]] virtual bool is_free(const Vec3& q) const = 0;

  /// Distance to the first non-free position along the ray, if any within
  /// (0, max_dist]. Throws InputError when the origin itself is not free or the
  /// direction is not unit length.
  [[nodiscard]] std::optional<double> raycast_occupied(const Vec3& origin, const Vec3& dir,
                                                       double max_dist) const;

  /// True iff every point of the closed segment is free.
  [[nodiscard]] bool segment_free(const Vec3& a, const Vec3& b) const;

 protected:
  [[nodiscard]] virtual std::optional<double> cast(const Vec3& origin, const Vec3& dir,
                                                   double max_dist) const;

  /// Called with both endpoints inside the bounds. The default samples the
  /// segment at march_step; the concrete maps test it exactly.
  [[nodiscard]] virtual bool segment_clear(const Vec3& a, const Vec3& b) const;

 private:
  double clearance_;
};

/// Uniform-cell bucket index over a fixed point set (CSR layout).
class PointIndex {
 public:
  PointIndex() = default;
  PointIndex(std::span<const Vec3> points, const Aabb& bounds, double cell_size);

  /// Indices of all points with |p - q| <= radius, ascending.
  [[nodiscard]] std::vector<std::size_t> radius_query(std::span<const Vec3> points, const Vec3& q,
                                                      double radius) const;

  /// True iff some point lies within radius of q (inclusive).
  [[nodiscard]] bool any_within(std::span<const Vec3> points, const Vec3& q, double radius) const;

  /// True iff some point lies within radius of the closed segment ab (inclusive).
  [[nodiscard]] bool any_within_segment(std::span<const Vec3> points, const Vec3& a, const Vec3& b,
                                        double radius) const;

  [[nodiscard]] double cell_size() const { return cell_size_; }

 private:
  template <typename Visit>
  bool visit_cells(const Vec3& q, double radius, Visit&& visit) const;

  Vec3 origin_ = Vec3::Zero();
  double cell_size_ = 1.0;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> order_;
};

class PointCloudMap final : public CollisionOracle {
 public:
  /// Bounds are the tight AABB of the points. Throws InputError on an empty cloud.
  PointCloudMap(std::vector<Vec3> points, double clearance);

  /// Explicit bounds; the cloud may be empty. Every point must lie inside bounds.
  PointCloudMap(std::vector<Vec3> points, const Aabb& bounds, double clearance);

  [[nodiscard]] const Aabb& bounds() const override { return bounds_; }
  [[nodiscard]] bool is_free(const Vec3& q) const override;

  [[nodiscard]] const std::vector<Vec3>& points() const { return points_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }

  [[nodiscard]] std::vector<std::size_t> radius_query(const Vec3& q, double radius) const {
    return index_.radius_query(points_, q, radius);
  }

 protected:
  [[nodiscard]] bool segment_clear(const Vec3& a, const Vec3& b) const override;

 private:
  std::vector<Vec3> points_;
  Aabb bounds_;
  PointIndex index_;
};

/// Dense boolean voxel map. Voxel (i,j,k) covers origin + [i,i+1)*voxel_size
/// on x (same for y, z); storage is x-fastest.
class OccupancyGridMap final : public CollisionOracle {
 public:
  OccupancyGridMap(const Vec3& origin, double voxel_size, const Eigen::Vector3i& dims,
                   std::vector<std::uint8_t> occupancy, double clearance);

  [[nodiscard]] const Aabb& bounds() const override { return bounds_; }
  [[nodiscard]] bool is_free(const Vec3& q) const override;
  [[nodiscard]] double march_step() const override;

  [[nodiscard]] const Vec3& origin() const { return origin_; }
  [[nodiscard]] double voxel_size() const { return voxel_size_; }
  [[nodiscard]] const Eigen::Vector3i& dims() const { return dims_; }
  [[nodiscard]] std::size_t voxel_count() const { return occupancy_.size(); }
  [[nodiscard]] const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  [[nodiscard]] bool in_grid(const Eigen::Vector3i& v) const {
    return (v.array() >= 0).all() && (v.array() < dims_.array()).all();
  }
  [[nodiscard]] std::size_t linear_index(const Eigen::Vector3i& v) const {
    return static_cast<std::size_t>(v.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(v.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(v.z()));
  }
  [[nodiscard]] Eigen::Vector3i voxel_of(const Vec3& q) const;
  [[nodiscard]] Vec3 voxel_center(const Eigen::Vector3i& v) const;
  [[nodiscard]] bool occupied(const Eigen::Vector3i& v) const {
    return occupancy_[linear_index(v)] != 0;
  }

  /// Voxel center is free at clearance. Precomputed at construction.
  [[nodiscard]] bool traversable(const Eigen::Vector3i& v) const {
    return in_grid(v) && traversable_[linear_index(v)] != 0;
  }

 protected:
  [[nodiscard]] std::optional<double> cast(const Vec3& origin, const Vec3& dir,
                                           double max_dist) const override;
  [[nodiscard]] bool segment_clear(const Vec3& a, const Vec3& b) const override;

 private:
  Vec3 origin_;
  double voxel_size_;
  Eigen::Vector3i dims_;
  std::vector<std::uint8_t> occupancy_;
  std::vector<std::uint8_t> traversable_;
  Aabb bounds_;
};

/// Loads ASCII PLY (vertex element with x,y,z properties) or whitespace
/// separated "x y z" text. Throws InputError with the offending line number.
[[nodiscard]] PointCloudMap load_point_cloud(const std::filesystem::path& path, double clearance);

void save_point_cloud_ply(const std::filesystem::path& path, std::span<const Vec3> points);
void save_point_cloud_xyz(const std::filesystem::path& path, std::span<const Vec3> points);

/// Grid JSON: header fields plus a run-length occupancy payload.
[[nodiscard]] OccupancyGridMap load_grid_map(const std::filesystem::path& path, double clearance);
void save_grid_map(const std::filesystem::path& path, const OccupancyGridMap& grid);

/// Marks every voxel that contains at least one cloud point.
[[nodiscard]] OccupancyGridMap voxelize(const PointCloudMap& cloud, double voxel_size);

/// Either loader, picked by extension (.json = grid, otherwise point cloud).
[[nodiscard]] std::unique_ptr<CollisionOracle> load_map(const std::filesystem::path& path,
                                                        double clearance);

}  // namespace skelgen

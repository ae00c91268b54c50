#pragma once

#include <skelgen/types.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace skelgen {

using Facet = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. Hull output keeps every input point in `vertices`
/// (interior points are simply unreferenced), so facet indices refer back to
/// the caller's point order.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Facet> facets;
  std::vector<Vec3> facet_normals;

  [[nodiscard]] Vec3 facet_center(std::size_t f) const {
    const auto& t = facets[f];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
  }

  /// Vertices referenced by at least one facet.
  [[nodiscard]] std::size_t referenced_vertex_count() const;

  /// For each facet, the facets sharing one of its edges (ascending).
  [[nodiscard]] std::vector<std::vector<std::uint32_t>> facet_adjacency() const;

  /// For each vertex, the vertices it shares an edge with (ascending).
  [[nodiscard]] std::vector<std::vector<std::uint32_t>> vertex_adjacency() const;

  [[nodiscard]] Aabb bounds() const;
};

/// Deterministic Fibonacci-spiral directions plus their hull-edge adjacency,
/// which serves as the canonical neighborhood between ray samples.
class DirectionSet {
 public:
  explicit DirectionSet(std::vector<Vec3> dirs);

  [[nodiscard]] std::size_t count() const { return dirs_.size(); }
  [[nodiscard]] const std::vector<Vec3>& dirs() const { return dirs_; }
  [[nodiscard]] const Vec3& operator[](std::size_t i) const { return dirs_[i]; }
  [[nodiscard]] const std::vector<std::uint32_t>& neighbors(std::size_t i) const {
    return neighbors_[i];
  }

 private:
  std::vector<Vec3> dirs_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

/// Throws InputError when count < 4.
[[nodiscard]] DirectionSet sample_unit_directions(int count);

/// c + (p - c) / |p - c|. Throws GeometryError when p == c.
[[nodiscard]] Vec3 project_to_unit_sphere(const Vec3& c, const Vec3& p);

/// Quickhull. Facet normals point away from the hull interior. Coplanar or
/// collinear input gets one retry with a deterministic 1e-8 jitter before
/// GeometryError is thrown.
[[nodiscard]] TriangleMesh convex_hull_mesh(std::span<const Vec3> points);

struct RayHit {
  double distance;
  std::size_t facet;
};

/// Nearest facet hit with distance in (0, max_dist]. Edge hits shared by two
/// facets are reported once, for the lower facet index.
[[nodiscard]] std::optional<RayHit> ray_mesh_intersect(const Vec3& origin, const Vec3& dir,
                                                       double max_dist, const TriangleMesh& mesh);

/// Single-triangle Moller-Trumbore; returns the ray parameter.
[[nodiscard]] std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir,
                                                 const Vec3& a, const Vec3& b, const Vec3& c);

[[nodiscard]] double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                                             const Vec3& c);

/// Unit normal of triangle (a, b, c) by right-hand winding; zero for degenerate triangles.
[[nodiscard]] Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);

/// Angle between two unit vectors in degrees.
[[nodiscard]] double angle_deg(const Vec3& a, const Vec3& b);

using NodeId = std::size_t;

/// A node's boundary: the unit-sphere hull topology carried onto the sample positions.
struct Polyhedron {
  TriangleMesh mesh;
  NodeId owner_node = 0;
};

/// Rebuilds `hull` with its vertices replaced by `positions` (same count, same
/// order). Facet triples are kept verbatim; normals are recomputed from the new
/// positions, falling back to the hull normal for collapsed triangles.
[[nodiscard]] Polyhedron map_polyhedron(const TriangleMesh& hull, std::span<const Vec3> positions,
                                        NodeId owner);

struct RegistryHit {
  double distance;
  std::size_t entry;
  NodeId owner;
  std::size_t facet;
};

/// Every accepted node boundary, queryable by ray.
class PolyhedronRegistry {
 public:
  std::size_t push(Polyhedron poly);

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const Polyhedron& operator[](std::size_t i) const { return entries_[i].poly; }

  /// Nearest hit with distance in (t_min, max_dist].
  [[nodiscard]] std::optional<RegistryHit> raycast(const Vec3& origin, const Vec3& dir,
                                                   double max_dist, double t_min = 1e-6) const;

  /// Whether `p` lies inside any boundary not owned by `skip` (crossing parity).
  [[nodiscard]] bool contains(const Vec3& p, std::optional<NodeId> skip = std::nullopt) const;

 private:
  struct Entry {
    Polyhedron poly;
    Aabb box;
  };
  std::vector<Entry> entries_;
};

/// Wavefront OBJ ("v"/"f" records, 1-based). `vertex_offset` is the number of
/// vertices already written to the stream; returns the new offset.
std::size_t write_obj(std::ostream& out, const TriangleMesh& mesh, std::size_t vertex_offset = 0,
                      const char* group = nullptr);

}  // namespace skelgen

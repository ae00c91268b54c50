#include <skelgen/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>

namespace skelgen {

namespace {

constexpr double kRayEpsilon = 1e-9;

std::uint64_t undirected_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

// ---------------------------------------------------------------------------
// TriangleMesh

std::size_t TriangleMesh::referenced_vertex_count() const {
  std::vector<char> used(vertices.size(), 0);
  for (const auto& t : facets)
    for (auto v : t) used[v] = 1;
  return static_cast<std::size_t>(std::count(used.begin(), used.end(), 1));
}

std::vector<std::vector<std::uint32_t>> TriangleMesh::facet_adjacency() const {
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_edge;
  for (std::uint32_t f = 0; f < facets.size(); ++f)
    for (int e = 0; e < 3; ++e) by_edge[undirected_key(facets[f][e], facets[f][(e + 1) % 3])].push_back(f);
  std::vector<std::vector<std::uint32_t>> adj(facets.size());
  for (const auto& [key, owners] : by_edge)
    for (auto a : owners)
      for (auto b : owners)
        if (a != b) adj[a].push_back(b);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::vector<std::vector<std::uint32_t>> TriangleMesh::vertex_adjacency() const {
  std::vector<std::vector<std::uint32_t>> adj(vertices.size());
  for (const auto& t : facets)
    for (int e = 0; e < 3; ++e) {
      adj[t[e]].push_back(t[(e + 1) % 3]);
      adj[t[(e + 1) % 3]].push_back(t[e]);
    }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const auto& t : facets)
    for (auto v : t) box.extend(vertices[v]);
  return box;
}

// ---------------------------------------------------------------------------
// Directions and projection

DirectionSet::DirectionSet(std::vector<Vec3> dirs) : dirs_(std::move(dirs)) {
  if (dirs_.size() < 4) throw InputError("direction set needs at least 4 directions");
  for (const auto& d : dirs_)
    if (std::abs(d.norm() - 1.0) > 1e-9) throw InputError("directions must be unit length");
  neighbors_ = convex_hull_mesh(dirs_).vertex_adjacency();
}

DirectionSet sample_unit_directions(int count) {
  if (count < 4) throw InputError("direction count must be at least 4");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    dirs.emplace_back(Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized());
  }
  return DirectionSet(std::move(dirs));
}

Vec3 project_to_unit_sphere(const Vec3& c, const Vec3& p) {
  const Vec3 d = p - c;
  const double len = d.norm();
  if (!(len > 0.0)) throw GeometryError("cannot project the sphere center onto the unit sphere");
  return c + d / len;
}

// ---------------------------------------------------------------------------
// Triangles

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (!(len > 1e-300)) return Vec3::Zero();
  return n / len;
}

double angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < -kRayEpsilon || u > 1.0 + kRayEpsilon) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < -kRayEpsilon || u + v > 1.0 + kRayEpsilon) return std::nullopt;
  return e2.dot(q) * inv;
}

std::optional<RayHit> ray_mesh_intersect(const Vec3& origin, const Vec3& dir, double max_dist,
                                         const TriangleMesh& mesh) {
  std::optional<RayHit> best;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const auto& t = mesh.facets[f];
    const auto hit = ray_triangle(origin, dir, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                  mesh.vertices[t[2]]);
    if (!hit || *hit <= kRayEpsilon || *hit > max_dist) continue;
    if (!best || *hit < best->distance) best = RayHit{*hit, f};
  }
  return best;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Closest-point by Voronoi regions of the triangle.
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  if (!std::isfinite(denom)) return std::min({(p - a).norm(), (p - b).norm(), (p - c).norm()});
  const double v = vb * denom;
  const double w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

// ---------------------------------------------------------------------------
// Polyhedra

Polyhedron map_polyhedron(const TriangleMesh& hull, std::span<const Vec3> positions, NodeId owner) {
  if (positions.size() != hull.vertices.size())
    throw GeometryError("mapped positions must match hull vertex count");
  Polyhedron poly;
  poly.owner_node = owner;
  poly.mesh.vertices.assign(positions.begin(), positions.end());
  poly.mesh.facets = hull.facets;
  poly.mesh.facet_normals.reserve(hull.facets.size());
  for (std::size_t f = 0; f < hull.facets.size(); ++f) {
    const auto& t = hull.facets[f];
    Vec3 n = triangle_normal(positions[t[0]], positions[t[1]], positions[t[2]]);
    if (n.isZero()) n = hull.facet_normals[f];
    poly.mesh.facet_normals.push_back(n);
  }
  return poly;
}

std::size_t PolyhedronRegistry::push(Polyhedron poly) {
  Aabb box = poly.mesh.bounds();
  entries_.push_back(Entry{std::move(poly), box});
  return entries_.size() - 1;
}

std::optional<RegistryHit> PolyhedronRegistry::raycast(const Vec3& origin, const Vec3& dir,
                                                       double max_dist, double t_min) const {
  std::optional<RegistryHit> best;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const double reach = best ? best->distance : max_dist;
    if (!e.box.intersects_ray(origin, dir, t_min, reach)) continue;
    const auto& mesh = e.poly.mesh;
    for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
      const auto& t = mesh.facets[f];
      const auto hit =
          ray_triangle(origin, dir, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
      if (!hit || *hit <= t_min || *hit > max_dist) continue;
      if (!best || *hit < best->distance) best = RegistryHit{*hit, i, e.poly.owner_node, f};
    }
  }
  return best;
}

bool PolyhedronRegistry::contains(const Vec3& p, std::optional<NodeId> skip) const {
  const Vec3 dir = Vec3(0.5773, 0.5917, 0.5627).normalized();
  for (const auto& e : entries_) {
    if (e.poly.owner_node == skip || !e.box.contains(p)) continue;
    const auto& mesh = e.poly.mesh;
    std::size_t crossings = 0;
    for (const auto& t : mesh.facets) {
      const auto hit = ray_triangle(p, dir, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
      if (hit && *hit > 0.0) ++crossings;
    }
    if (crossings % 2 == 1) return true;
  }
  return false;
}

std::size_t write_obj(std::ostream& out, const TriangleMesh& mesh, std::size_t vertex_offset,
                      const char* group) {
  if (group) out << "g " << group << '\n';
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.facets)
    out << "f " << vertex_offset + t[0] + 1 << ' ' << vertex_offset + t[1] + 1 << ' '
        << vertex_offset + t[2] + 1 << '\n';
  return vertex_offset + mesh.vertices.size();
}

}  // namespace skelgen

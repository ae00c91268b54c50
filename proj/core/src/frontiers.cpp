#include <skelgen/skeleton.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace skelgen {

void finalize_frontier(const TriangleMesh& mesh, Frontier& f) {
  Vec3 sum = Vec3::Zero();
  Vec3 mean = Vec3::Zero();
  for (auto idx : f.facets) {
    sum += mesh.facet_normals[idx];
    mean += mesh.facet_center(idx);
  }
  mean /= static_cast<double>(f.facets.size());
  f.normal = sum.norm() > 1e-12 ? Vec3(sum.normalized()) : mesh.facet_normals[f.facets.front()];

  // Project the mean of facet centers along the normal onto the nearest member facet.
  double best = std::numeric_limits<double>::infinity();
  for (auto idx : f.facets) {
    const auto& t = mesh.facets[idx];
    const auto s = ray_triangle(mean, f.normal, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                mesh.vertices[t[2]]);
    if (s && std::abs(*s) < best) {
      best = std::abs(*s);
      f.center = mean + *s * f.normal;
    }
  }
  if (std::isfinite(best)) return;

  best = std::numeric_limits<double>::infinity();
  for (auto idx : f.facets) {
    const double d = (mesh.facet_center(idx) - mean).squaredNorm();
    if (d < best) {
      best = d;
      f.center = mesh.facet_center(idx);
    }
  }
}

std::vector<Frontier> split_frontier(const TriangleMesh& mesh, const Frontier& f,
                                     double threshold_deg) {
  std::vector<std::uint32_t> members = f.facets;
  std::sort(members.begin(), members.end());
  auto is_member = [&](std::uint32_t x) {
    return std::binary_search(members.begin(), members.end(), x);
  };
  const auto adjacency = mesh.facet_adjacency();

  std::vector<char> assigned(mesh.facets.size(), 0);
  std::vector<Frontier> parts;
  for (auto seed : members) {
    if (assigned[seed]) continue;
    Frontier part;
    part.parent_node = f.parent_node;
    part.blind = f.blind;
    part.facets.push_back(seed);
    assigned[seed] = 1;
    Vec3 sum = mesh.facet_normals[seed];
    for (std::size_t q = 0; q < part.facets.size(); ++q) {
      for (auto nb : adjacency[part.facets[q]]) {
        if (assigned[nb] || !is_member(nb)) continue;
        const Vec3& n = mesh.facet_normals[nb];
        if (angle_deg(n, sum) > threshold_deg) continue;
        const bool fits = std::all_of(part.facets.begin(), part.facets.end(), [&](std::uint32_t m) {
          return angle_deg(n, mesh.facet_normals[m]) <= threshold_deg;
        });
        if (!fits) continue;
        assigned[nb] = 1;
        part.facets.push_back(nb);
        sum += n;
      }
    }
    std::sort(part.facets.begin(), part.facets.end());
    finalize_frontier(mesh, part);
    parts.push_back(std::move(part));
  }
  return parts;
}

std::vector<std::vector<std::uint32_t>> group_black_samples(std::span<const VertexSample> black,
                                                            std::span<const VertexSample> white,
                                                            const DirectionSet& dirs,
                                                            const TriangleMesh& mesh) {
  std::vector<char> white_dir(dirs.count(), 0);
  for (const auto& w : white) white_dir[w.source_direction] = 1;

  std::vector<char> grouped(black.size(), 0);
  for (std::size_t i = 0; i < black.size(); ++i)
    for (auto nb : dirs.neighbors(black[i].source_direction))
      if (white_dir[nb]) {
        grouped[i] = 1;
        break;
      }

  const auto adjacency = mesh.vertex_adjacency();
  std::vector<char> seen(black.size(), 0);
  std::vector<std::vector<std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < black.size(); ++i) {
    if (!grouped[i] || seen[i]) continue;
    std::vector<std::uint32_t> group{i};
    seen[i] = 1;
    for (std::size_t q = 0; q < group.size(); ++q)
      for (auto nb : adjacency[group[q]])
        if (grouped[nb] && !seen[nb]) {
          seen[nb] = 1;
          group.push_back(nb);
        }
    std::sort(group.begin(), group.end());
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<std::uint32_t> group_facets(const TriangleMesh& mesh,
                                        std::span<const std::uint32_t> group) {
  std::vector<char> in_group(mesh.vertices.size(), 0);
  for (auto v : group) in_group[v] = 1;
  std::vector<std::uint32_t> out;
  for (std::uint32_t f = 0; f < mesh.facets.size(); ++f) {
    const auto& t = mesh.facets[f];
    if (in_group[t[0]] && in_group[t[1]] && in_group[t[2]]) out.push_back(f);
  }
  return out;
}

std::vector<Frontier> detect_blind_frontiers(const Polyhedron& poly, const Vec3& center,
                                             std::span<const std::uint32_t> excluded,
                                             double ratio, double split_threshold_deg) {
  const auto& mesh = poly.mesh;
  std::vector<char> blind(mesh.facets.size(), 0);
  std::vector<char> skip(mesh.facets.size(), 0);
  for (auto f : excluded) skip[f] = 1;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    if (skip[f]) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (auto v : mesh.facets[f]) {
      const double d = (mesh.vertices[v] - center).norm();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (hi > ratio * lo) blind[f] = 1;
  }

  const auto adjacency = mesh.facet_adjacency();
  std::vector<char> seen(mesh.facets.size(), 0);
  std::vector<Frontier> out;
  for (std::uint32_t f = 0; f < mesh.facets.size(); ++f) {
    if (!blind[f] || seen[f]) continue;
    Frontier fr;
    fr.parent_node = poly.owner_node;
    fr.blind = true;
    fr.facets.push_back(f);
    seen[f] = 1;
    for (std::size_t q = 0; q < fr.facets.size(); ++q)
      for (auto nb : adjacency[fr.facets[q]])
        if (blind[nb] && !seen[nb]) {
          seen[nb] = 1;
          fr.facets.push_back(nb);
        }
    std::sort(fr.facets.begin(), fr.facets.end());
    for (auto& part : split_frontier(mesh, fr, split_threshold_deg)) out.push_back(std::move(part));
  }
  return out;
}

PolyAndFrontiers build_poly_and_frontiers(NodeId node, const Vec3& initial_center,
                                          std::span<const VertexSample> black,
                                          std::span<const VertexSample> white,
                                          const DirectionSet& dirs, const GenerationParams& params) {
  if (black.size() < 4) throw GeometryError("polyhedron needs at least 4 black samples");

  std::vector<Vec3> projected;
  std::vector<Vec3> positions;
  projected.reserve(black.size());
  positions.reserve(black.size());
  for (const auto& b : black) {
    projected.push_back(b.projected_position);
    positions.push_back(b.position);
  }

  PolyAndFrontiers out;
  out.unit_hull = convex_hull_mesh(projected);
  out.polyhedron = map_polyhedron(out.unit_hull, positions, node);
  // Frontier normals come from the sphere hull, positions from the mapped mesh.
  TriangleMesh mesh = out.polyhedron.mesh;
  mesh.facet_normals = out.unit_hull.facet_normals;

  std::vector<std::uint32_t> used;
  for (const auto& group : group_black_samples(black, white, dirs, mesh)) {
    Frontier f;
    f.parent_node = node;
    f.facets = group_facets(mesh, group);
    if (f.facets.empty()) continue;
    used.insert(used.end(), f.facets.begin(), f.facets.end());
    for (auto& part : split_frontier(mesh, f, params.split_angle_threshold))
      out.frontiers.push_back(std::move(part));
  }
  for (auto& f : detect_blind_frontiers(out.polyhedron, initial_center, used,
                                        params.blind_distance_ratio, params.split_angle_threshold))
    out.frontiers.push_back(std::move(f));

  std::stable_sort(out.frontiers.begin(), out.frontiers.end(),
                   [](const Frontier& a, const Frontier& b) {
                     return a.facets.size() > b.facets.size();
                   });
  return out;
}

}  // namespace skelgen

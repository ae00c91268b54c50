#include <skelgen/skeleton.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>

namespace skelgen {

namespace {

// Dijkstra from `from`, abandoned once the frontier passes `limit`.
double graph_distance(const SkeletonGraph& graph, VertexId from, VertexId to, double limit) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.vertex_count(), inf);
  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[from] = 0.0;
  open.push({0.0, from});
  while (!open.empty()) {
    const auto [d, v] = open.top();
    open.pop();
    if (v == to) return d;
    if (d > limit) break;
    if (d > dist[v]) continue;
    for (const auto& [w, e] : graph.neighbors(v)) {
      const double nd = d + graph.edges()[e].length;
      if (nd < dist[w]) {
        dist[w] = nd;
        open.push({nd, w});
      }
    }
  }
  return inf;
}

// Vertex chain of a shortest route, empty when `to` is unreachable.
std::vector<VertexId> graph_route(const SkeletonGraph& graph, VertexId from, VertexId to) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.vertex_count(), inf);
  std::vector<VertexId> prev(graph.vertex_count(), from);
  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[from] = 0.0;
  open.push({0.0, from});
  while (!open.empty()) {
    const auto [d, v] = open.top();
    open.pop();
    if (v == to) break;
    if (d > dist[v]) continue;
    for (const auto& [w, e] : graph.neighbors(v)) {
      const double nd = d + graph.edges()[e].length;
      if (nd < dist[w]) {
        dist[w] = nd;
        prev[w] = v;
        open.push({nd, w});
      }
    }
  }
  if (dist[to] == inf) return {};
  std::vector<VertexId> route{to};
  while (route.back() != from) route.push_back(prev[route.back()]);
  std::reverse(route.begin(), route.end());
  return route;
}

// Fan of segments from `a` to points along b-c, spaced at the clearance.
bool triangle_free(const CollisionOracle& map, const Vec3& a, const Vec3& b, const Vec3& c) {
  const int n = std::max(1, static_cast<int>(std::ceil((c - b).norm() / map.clearance())));
  for (int i = 0; i <= n; ++i)
    if (!map.segment_free(a, b + (c - b) * (static_cast<double>(i) / n))) return false;
  return true;
}

// Greedy shrink of a closed polyline through free triangles. Each removal is a
// homotopy in free space, so a loop wrapped around an obstacle never collapses.
bool loop_contractible(const CollisionOracle& map, std::vector<Vec3> loop) {
  while (loop.size() > 2) {
    bool progress = false;
    for (std::size_t i = 0; i < loop.size() && loop.size() > 2;) {
      const std::size_t n = loop.size();
      const Vec3& a = loop[(i + n - 1) % n];
      const Vec3& c = loop[(i + 1) % n];
      if (triangle_free(map, a, loop[i], c)) {
        loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(i));
        progress = true;
      } else {
        ++i;
      }
    }
    if (!progress) return false;
  }
  return true;
}

}  // namespace

void GenerationParams::validate() const {
  if (ray_count < 4) throw InputError("ray_count must be at least 4");
  if (!(max_ray_length > 0.0)) throw InputError("max_ray_length must be positive");
  if (!(frontier_clear_distance > 0.0)) throw InputError("frontier_clear_distance must be positive");
  if (!(node_size_epsilon > 0.0)) throw InputError("node_size_epsilon must be positive");
  if (!(split_angle_threshold > 0.0 && split_angle_threshold < 180.0))
    throw InputError("split_angle_threshold must be in (0, 180) degrees");
  if (!(blind_distance_ratio > 0.0)) throw InputError("blind_distance_ratio must be positive");
  if (!(clearance > 0.0)) throw InputError("clearance must be positive");
  if (!(cycle_min_detour >= 0.0)) throw InputError("cycle_min_detour must be non-negative");
  if (max_expansions == 0) throw InputError("max_expansions must be positive");
}

FrontierVerdict verify_frontier(const Frontier& f, const CollisionOracle& map,
                                const PolyhedronRegistry& registry,
                                const GenerationParams& params) {
  FrontierVerdict verdict;
  if (!map.is_free(f.center)) return verdict;
  double reach = params.max_ray_length;
  if (const auto hit = map.raycast_occupied(f.center, f.normal, reach)) reach = *hit;
  if (const auto hit = registry.raycast(f.center, f.normal, reach)) reach = hit->distance;
  verdict.clear_distance = reach;
  const Vec3 mid = f.center + 0.5 * reach * f.normal;
  // The midpoint becomes the next initial center: free and outside every other node.
  if (reach > params.frontier_clear_distance && map.is_free(mid) &&
      !registry.contains(mid, f.parent_node)) {
    verdict.valid = true;
    verdict.initial_position = mid;
  }
  return verdict;
}

SampleSet generate_vertices(const Vec3& initial_center, const DirectionSet& dirs,
                            const CollisionOracle& map, const PolyhedronRegistry& registry,
                            const GenerationParams& params) {
  if (!map.is_free(initial_center)) throw InputError("node center in occupied space");
  const double step = map.march_step();
  SampleSet out;
  for (std::size_t i = 0; i < dirs.count(); ++i) {
    const Vec3& d = dirs[i];
    const auto map_hit = map.raycast_occupied(initial_center, d, params.max_ray_length);
    const double reach = map_hit ? *map_hit : params.max_ray_length;
    const auto poly_hit = registry.raycast(initial_center, d, reach);

    VertexSample s;
    s.source_direction = i;
    if (poly_hit) {
      s.kind = SampleKind::Black;
      s.position = initial_center + poly_hit->distance * d;
      s.detected_polyhedron = poly_hit->owner;
    } else if (map_hit) {
      // Last free march position in front of the obstacle.
      const double t = *map_hit > step ? *map_hit - step : 0.5 * *map_hit;
      s.kind = SampleKind::Black;
      s.position = initial_center + t * d;
    } else {
      s.kind = SampleKind::White;
      s.position = initial_center + params.max_ray_length * d;
    }
    s.projected_position = project_to_unit_sphere(initial_center, s.position);
    (s.kind == SampleKind::Black ? out.black : out.white).push_back(std::move(s));
  }
  return out;
}

CycleFormation form_cycles(const Vec3& node_center, std::span<const VertexSample> black,
                           std::span<const Node> nodes, const CollisionOracle& map,
                           std::optional<NodeId> exclude) {
  CycleFormation out;
  std::set<NodeId> owners;
  for (const auto& b : black)
    if (b.detected_polyhedron && b.detected_polyhedron != exclude) owners.insert(*b.detected_polyhedron);

  const double tolerance = map.march_step();
  for (const NodeId owner : owners) {
    const Node& other = nodes[owner];
    const auto& mesh = other.polyhedron.mesh;
    std::size_t best_count = 0;
    std::size_t best_index = 0;
    for (std::size_t fi = 0; fi < other.frontiers.size(); ++fi) {
      std::size_t count = 0;
      for (const auto& b : black) {
        if (b.detected_polyhedron != owner) continue;
        for (auto idx : other.frontiers[fi].facets) {
          const auto& t = mesh.facets[idx];
          if (point_triangle_distance(b.position, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                      mesh.vertices[t[2]]) <= tolerance) {
            ++count;
            break;
          }
        }
      }
      if (count > best_count) {
        best_count = count;
        best_index = fi;
      }
    }
    if (best_count == 0) continue;

    const Vec3 gate = other.frontiers[best_index].center;
    if (map.is_free(gate) && map.segment_free(gate, node_center) &&
        map.segment_free(gate, other.center)) {
      out.closures.push_back(CycleClosure{owner, best_index, best_count, gate});
    } else {
      ++out.revoked;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SkeletonBuilder

SkeletonBuilder::SkeletonBuilder(const CollisionOracle& map, GenerationParams params)
    : map_(map), params_(params), dirs_(sample_unit_directions(params.ray_count)) {
  params_.validate();
}

NodeId SkeletonBuilder::initialize(const Vec3& seed) {
  if (!map_.bounds().contains(seed)) throw InputError("seed outside bounds");
  if (!map_.is_free(seed)) throw InputError("seed occupied");
  const auto id = expand_at(seed, std::nullopt, std::nullopt);
  if (!id) throw GeometryError("cannot build a polyhedron at the seed position");
  return *id;
}

std::optional<NodeId> SkeletonBuilder::expand_node(NodeId parent, std::size_t frontier_index) {
  const Frontier& f = skeleton_.nodes.at(parent).frontiers.at(frontier_index);
  if (!f.initial_position) return std::nullopt;
  return expand_at(*f.initial_position, parent, frontier_index);
}

std::optional<NodeId> SkeletonBuilder::expand_at(const Vec3& initial_center,
                                                 std::optional<NodeId> parent,
                                                 std::optional<std::size_t> frontier_index) {
  auto& stats = skeleton_.stats;
  ++stats.expansions;
  SampleSet samples = generate_vertices(initial_center, dirs_, map_, skeleton_.graph.registry(), params_);

  double size = 0.0;
  for (const auto& b : samples.black) size += (b.position - initial_center).norm();
  if (!samples.black.empty()) size /= static_cast<double>(samples.black.size());

  if (parent && samples.white.empty() && size <= params_.node_size_epsilon) {
    ++stats.rejected_small;
    return std::nullopt;
  }

  const auto id = static_cast<NodeId>(skeleton_.nodes.size());
  PolyAndFrontiers built;
  try {
    built = build_poly_and_frontiers(id, initial_center, samples.black, samples.white, dirs_, params_);
  } catch (const GeometryError&) {
    ++stats.rejected_degenerate;
    return std::nullopt;
  }

  // Rectified center: mean of the black samples, unless that lands in occupied space.
  Vec3 center = Vec3::Zero();
  for (const auto& b : samples.black) center += b.position;
  center /= static_cast<double>(samples.black.size());
  if (!map_.is_free(center)) center = initial_center;

  std::optional<Vec3> gate_position;
  if (parent) {
    gate_position = skeleton_.nodes[*parent].frontiers[*frontier_index].center;
    if (!map_.segment_free(*gate_position, center)) center = initial_center;
    if (!map_.segment_free(*gate_position, center) ||
        !map_.segment_free(*gate_position, skeleton_.nodes[*parent].center)) {
      ++stats.rejected_connection;
      return std::nullopt;
    }
  }

  CycleFormation cycles;
  if (params_.form_cycles) cycles = form_cycles(center, samples.black, skeleton_.nodes, map_, parent);
  stats.cycles_revoked += cycles.revoked;

  // Commit.
  auto& graph = skeleton_.graph;
  Node node;
  node.id = id;
  node.vertex = graph.add_vertex(VertexKind::Node, center);
  node.center = center;
  node.initial_center = initial_center;
  node.polyhedron = std::move(built.polyhedron);
  node.frontiers = std::move(built.frontiers);
  node.size = size;
  node.parent = parent;
  node.black_samples = std::move(samples.black);
  graph.registry().push(node.polyhedron);
  for (std::size_t i = 0; i < node.frontiers.size(); ++i) pending_.push_back({id, i});

  auto add_gate = [&](const Vec3& pos, NodeId a, NodeId b, bool closes_cycle) {
    Gate gate;
    gate.id = skeleton_.gates.size();
    gate.vertex = graph.add_vertex(VertexKind::Gate, pos);
    gate.position = pos;
    gate.linked_nodes = {a, b};
    gate.closes_cycle = closes_cycle;
    graph.add_edge(gate.vertex, skeleton_.nodes[a].vertex);
    graph.add_edge(gate.vertex, skeleton_.nodes[b].vertex);
    skeleton_.gates.push_back(gate);
  };

  skeleton_.nodes.push_back(std::move(node));
  if (parent) add_gate(*gate_position, *parent, id, false);
  for (const auto& c : cycles.closures) {
    const Node& other = skeleton_.nodes[c.owner];
    const double direct = (other.center - c.gate_position).norm() + (c.gate_position - center).norm();
    // The direct route is floored at one node diameter.
    const double limit =
        params_.cycle_min_detour * std::max(direct, 2.0 * params_.max_ray_length);
    if (params_.cycle_min_detour > 0.0 &&
        graph_distance(graph, skeleton_.nodes[id].vertex, other.vertex, limit) <= limit) {
      ++stats.cycles_redundant;
      continue;
    }
    if (params_.cycle_min_detour > 0.0) {
      std::vector<Vec3> loop{c.gate_position};
      for (const VertexId v : graph_route(graph, skeleton_.nodes[id].vertex, other.vertex))
        loop.push_back(graph.vertex(v).position);
      if (loop.size() > 1 && loop_contractible(map_, loop)) {
        ++stats.cycles_redundant;
        continue;
      }
    }
    add_gate(c.gate_position, c.owner, id, true);
    ++stats.cycles_formed;
  }
  return id;
}

bool SkeletonBuilder::step() {
  if (pending_.empty()) return false;
  const PendingFrontier next = pending_.front();
  pending_.pop_front();
  auto& stats = skeleton_.stats;
  ++stats.frontiers_popped;

  Frontier& f = skeleton_.nodes[next.node].frontiers[next.index];
  const auto verdict = verify_frontier(f, map_, skeleton_.graph.registry(), params_);
  if (!verdict.valid) {
    ++stats.frontiers_invalid;
    return true;
  }
  f.initial_position = verdict.initial_position;
  if (stats.expansions >= params_.max_expansions) {
    stats.hit_expansion_cap = true;
    pending_.clear();
    return false;
  }
  expand_node(next.node, next.index);
  return true;
}

void SkeletonBuilder::run() {
  while (step()) {
  }
}

Skeleton generate_skeleton(const CollisionOracle& map, const Vec3& seed,
                           const GenerationParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  SkeletonBuilder builder(map, params);
  builder.initialize(seed);
  builder.run();
  Skeleton out = builder.release();
  out.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void save_polyhedra_obj(const std::filesystem::path& path, const Skeleton& skeleton) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "# " << skeleton.nodes.size() << " node polyhedra\n";
  std::size_t offset = 0;
  for (const auto& n : skeleton.nodes) {
    const std::string name = "node_" + std::to_string(n.id);
    offset = write_obj(out, n.polyhedron.mesh, offset, name.c_str());
  }
  for (const auto& n : skeleton.nodes) {
    for (std::size_t i = 0; i < n.frontiers.size(); ++i) {
      TriangleMesh part;
      part.vertices = n.polyhedron.mesh.vertices;
      for (auto f : n.frontiers[i].facets) part.facets.push_back(n.polyhedron.mesh.facets[f]);
      const std::string name = "frontier_" + std::to_string(n.id) + "_" + std::to_string(i);
      offset = write_obj(out, part, offset, name.c_str());
    }
  }
}

}  // namespace skelgen

#pragma once

#include <skelgen/geometry.hpp>
#include <skelgen/map.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace skelgen {

enum class VertexKind { Node, Gate };

using VertexId = std::uint32_t;

struct GraphVertex {
  VertexId id;
  VertexKind kind;
  Vec3 position;
};

struct GraphEdge {
  VertexId a;
  VertexId b;
  double length;
};

/// Undirected skeleton graph: nodes and gates as vertices, connections as
/// edges, plus the registry of node boundaries used during generation.
class SkeletonGraph {
 public:
  VertexId add_vertex(VertexKind kind, const Vec3& position);

  /// Length is the Euclidean distance between the endpoints. Throws
  /// std::invalid_argument on unknown ids, self-loops or duplicate edges.
  std::size_t add_edge(VertexId a, VertexId b);

  [[nodiscard]] bool has_edge(VertexId a, VertexId b) const;

  [[nodiscard]] const std::vector<GraphVertex>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<GraphEdge>& edges() const { return edges_; }
  [[nodiscard]] const GraphVertex& vertex(VertexId id) const { return vertices_.at(id); }

  /// (neighbor, edge index) pairs in insertion order.
  [[nodiscard]] const std::vector<std::pair<VertexId, std::size_t>>& neighbors(VertexId id) const {
    return adjacency_.at(id);
  }

  [[nodiscard]] std::size_t vertex_count() const { return vertices_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }

  [[nodiscard]] PolyhedronRegistry& registry() { return registry_; }
  [[nodiscard]] const PolyhedronRegistry& registry() const { return registry_; }

 private:
  std::vector<GraphVertex> vertices_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<VertexId, std::size_t>>> adjacency_;
  PolyhedronRegistry registry_;
};

struct GraphMetrics {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t component_count = 0;
  long cycle_rank = 0;  ///< E - V + components
};

[[nodiscard]] GraphMetrics graph_metrics(const SkeletonGraph& graph);

struct PlanResult {
  std::vector<Vec3> waypoints;
  double length = 0.0;
  std::size_t expanded_count = 0;
  double elapsed_seconds = 0.0;
};

struct AttachOptions {
  int max_candidates = 30;
};

/// A* over the skeleton graph. Start and goal join the graph at the nearest
/// vertex reachable by a collision-free straight segment. Waypoints are
/// start, the vertex chain, goal.
///
/// Throws InputError("start in collision"/"goal in collision") for occupied
/// endpoints and PlanningError when attachment fails or no path exists.
[[nodiscard]] PlanResult plan_astar(const SkeletonGraph& graph, const Vec3& start, const Vec3& goal,
                                    const CollisionOracle& map, AttachOptions options = {});

/// 26-connected A* over traversable voxel centers (Euclidean move costs).
/// Waypoints are voxel centers from the start voxel to the goal voxel.
[[nodiscard]] PlanResult grid_astar(const OccupancyGridMap& grid, const Vec3& start,
                                    const Vec3& goal);

/// Graph JSON: {"vertices":[{"id","kind","pos"}], "edges":[{"a","b","len"}]}.
[[nodiscard]] std::string graph_to_json(const SkeletonGraph& graph);
[[nodiscard]] SkeletonGraph graph_from_json(const std::string& text);
void save_graph_json(const std::filesystem::path& path, const SkeletonGraph& graph);
[[nodiscard]] SkeletonGraph load_graph_json(const std::filesystem::path& path);

/// Waypoint CSV: "index,x,y,z" header then one row per waypoint.
void save_path_csv(const std::filesystem::path& path, const PlanResult& plan);

/// Polyline OBJ of the graph ("v" per vertex, "l" per edge).
void save_graph_obj(const std::filesystem::path& path, const SkeletonGraph& graph);

}  // namespace skelgen

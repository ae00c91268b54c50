#include <skelgen/graph.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

namespace skelgen {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double polyline_length(const std::vector<Vec3>& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  return total;
}

// Nearest graph vertex with a collision-free straight segment to q.
std::optional<VertexId> attach(const SkeletonGraph& graph, const Vec3& q,
                               const CollisionOracle& map, int max_candidates) {
  std::vector<std::pair<double, VertexId>> order;
  order.reserve(graph.vertex_count());
  for (const auto& v : graph.vertices()) order.emplace_back((v.position - q).squaredNorm(), v.id);
  const auto keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(max_candidates));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
  for (std::size_t i = 0; i < keep; ++i)
    if (map.segment_free(q, graph.vertex(order[i].second).position)) return order[i].second;
  return std::nullopt;
}

// Min-heap entry; equal priorities pop the lower id first.
struct QueueEntry {
  double f;
  std::size_t id;
  bool operator>(const QueueEntry& o) const { return f != o.f ? f > o.f : id > o.id; }
};

using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

}  // namespace

PlanResult plan_astar(const SkeletonGraph& graph, const Vec3& start, const Vec3& goal,
                      const CollisionOracle& map, AttachOptions options) {
  const auto t0 = Clock::now();
  if (!map.is_free(start)) throw InputError("start in collision");
  if (!map.is_free(goal)) throw InputError("goal in collision");

  PlanResult result;
  if (start == goal) {
    result.waypoints = {start};
    result.elapsed_seconds = seconds_since(t0);
    return result;
  }

  const auto s = attach(graph, start, map, options.max_candidates);
  if (!s) throw PlanningError("cannot attach start to the skeleton graph");
  const auto t = attach(graph, goal, map, options.max_candidates);
  if (!t) throw PlanningError("cannot attach goal to the skeleton graph");

  const std::size_t n = graph.vertex_count();
  std::vector<double> g(n, kInf);
  std::vector<VertexId> parent(n, std::numeric_limits<VertexId>::max());
  std::vector<char> closed(n, 0);
  const Vec3& target = graph.vertex(*t).position;
  auto h = [&](VertexId v) { return (graph.vertex(v).position - target).norm(); };

  MinQueue open;
  g[*s] = 0.0;
  open.push({h(*s), *s});
  bool found = false;
  while (!open.empty()) {
    const auto [f, id] = open.top();
    open.pop();
    const auto u = static_cast<VertexId>(id);
    if (closed[u]) continue;
    closed[u] = 1;
    ++result.expanded_count;
    if (u == *t) {
      found = true;
      break;
    }
    for (const auto& [w, e] : graph.neighbors(u)) {
      if (closed[w]) continue;
      const double cand = g[u] + graph.edges()[e].length;
      if (cand < g[w]) {
        g[w] = cand;
        parent[w] = u;
        open.push({cand + h(w), w});
      }
    }
  }
  if (!found) throw PlanningError("no path between start and goal in the skeleton graph");

  std::vector<Vec3> chain;
  for (VertexId v = *t;; v = parent[v]) {
    chain.push_back(graph.vertex(v).position);
    if (v == *s) break;
  }
  result.waypoints.push_back(start);
  result.waypoints.insert(result.waypoints.end(), chain.rbegin(), chain.rend());
  result.waypoints.push_back(goal);
  result.length = polyline_length(result.waypoints);
  result.elapsed_seconds = seconds_since(t0);
  return result;
}

PlanResult grid_astar(const OccupancyGridMap& grid, const Vec3& start, const Vec3& goal) {
  const auto t0 = Clock::now();
  const Eigen::Vector3i sv = grid.voxel_of(start);
  const Eigen::Vector3i gv = grid.voxel_of(goal);
  if (!grid.traversable(sv)) throw InputError("start in collision");
  if (!grid.traversable(gv)) throw InputError("goal in collision");

  struct Move {
    Eigen::Vector3i d;
    double cost;
  };
  std::vector<Move> moves;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int k = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (k == 0) continue;
        moves.push_back({Eigen::Vector3i(dx, dy, dz), grid.voxel_size() * std::sqrt(double(k))});
      }

  const std::size_t n = grid.voxel_count();
  const std::size_t s = grid.linear_index(sv);
  const std::size_t t = grid.linear_index(gv);
  const Eigen::Vector3i& dims = grid.dims();
  auto unpack = [&](std::size_t idx) {
    const auto nx = static_cast<std::size_t>(dims.x());
    const auto ny = static_cast<std::size_t>(dims.y());
    return Eigen::Vector3i(static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                           static_cast<int>(idx / (nx * ny)));
  };
  const Vec3 target = grid.voxel_center(gv);
  auto h = [&](const Eigen::Vector3i& v) { return (grid.voxel_center(v) - target).norm(); };

  std::vector<double> g(n, kInf);
  std::vector<std::uint32_t> parent(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<char> closed(n, 0);
  MinQueue open;
  g[s] = 0.0;
  open.push({h(sv), s});

  PlanResult result;
  bool found = false;
  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    ++result.expanded_count;
    if (u == t) {
      found = true;
      break;
    }
    const Eigen::Vector3i uv = unpack(u);
    for (const auto& m : moves) {
      const Eigen::Vector3i wv = uv + m.d;
      if (!grid.traversable(wv)) continue;
      const std::size_t w = grid.linear_index(wv);
      if (closed[w]) continue;
      const double cand = g[u] + m.cost;
      if (cand < g[w]) {
        g[w] = cand;
        parent[w] = static_cast<std::uint32_t>(u);
        open.push({cand + h(wv), w});
      }
    }
  }
  if (!found) throw PlanningError("goal unreachable on the grid");

  std::vector<Vec3> chain;
  for (std::size_t v = t;; v = parent[v]) {
    chain.push_back(grid.voxel_center(unpack(v)));
    if (v == s) break;
  }
  result.waypoints.assign(chain.rbegin(), chain.rend());
  result.length = polyline_length(result.waypoints);
  result.elapsed_seconds = seconds_since(t0);
  return result;
}

}  // namespace skelgen

#include <skelgen/graph.hpp>

#include <json.hpp>

#include <fstream>
#include <numeric>
#include <stdexcept>

namespace skelgen {

using json = nlohmann::json;

VertexId SkeletonGraph::add_vertex(VertexKind kind, const Vec3& position) {
  const auto id = static_cast<VertexId>(vertices_.size());
  vertices_.push_back(GraphVertex{id, kind, position});
  adjacency_.emplace_back();
  return id;
}

bool SkeletonGraph::has_edge(VertexId a, VertexId b) const {
  if (a >= vertices_.size() || b >= vertices_.size()) return false;
  for (const auto& [n, e] : adjacency_[a])
    if (n == b) return true;
  return false;
}

std::size_t SkeletonGraph::add_edge(VertexId a, VertexId b) {
  if (a >= vertices_.size() || b >= vertices_.size())
    throw std::invalid_argument("edge endpoint does not exist");
  if (a == b) throw std::invalid_argument("self-loop edges are not allowed");
  if (has_edge(a, b)) throw std::invalid_argument("duplicate edge");
  const double length = (vertices_[a].position - vertices_[b].position).norm();
  edges_.push_back(GraphEdge{a, b, length});
  const std::size_t idx = edges_.size() - 1;
  adjacency_[a].emplace_back(b, idx);
  adjacency_[b].emplace_back(a, idx);
  return idx;
}

GraphMetrics graph_metrics(const SkeletonGraph& graph) {
  GraphMetrics m;
  m.vertex_count = graph.vertex_count();
  m.edge_count = graph.edge_count();
  std::vector<std::size_t> parent(m.vertex_count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = m.vertex_count;
  for (const auto& e : graph.edges()) {
    const auto ra = find(e.a);
    const auto rb = find(e.b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  m.component_count = components;
  m.cycle_rank = static_cast<long>(m.edge_count) - static_cast<long>(m.vertex_count) +
                 static_cast<long>(components);
  return m;
}

// ---------------------------------------------------------------------------
// Serialization

std::string graph_to_json(const SkeletonGraph& graph) {
  json doc;
  doc["vertices"] = json::array();
  for (const auto& v : graph.vertices()) {
    doc["vertices"].push_back({{"id", v.id},
                               {"kind", v.kind == VertexKind::Node ? "node" : "gate"},
                               {"pos", {v.position.x(), v.position.y(), v.position.z()}}});
  }
  doc["edges"] = json::array();
  for (const auto& e : graph.edges()) doc["edges"].push_back({{"a", e.a}, {"b", e.b}, {"len", e.length}});
  return doc.dump(1);
}

SkeletonGraph graph_from_json(const std::string& text) {
  SkeletonGraph graph;
  try {
    const auto doc = json::parse(text);
    VertexId expected = 0;
    for (const auto& v : doc.at("vertices")) {
      if (v.at("id").get<VertexId>() != expected)
        throw InputError("graph JSON vertex ids must be 0..n-1 in order");
      const auto kind = v.at("kind").get<std::string>();
      if (kind != "node" && kind != "gate") throw InputError("unknown vertex kind: " + kind);
      const auto pos = v.at("pos").get<std::vector<double>>();
      if (pos.size() != 3) throw InputError("vertex pos needs 3 entries");
      graph.add_vertex(kind == "node" ? VertexKind::Node : VertexKind::Gate,
                       Vec3(pos[0], pos[1], pos[2]));
      ++expected;
    }
    for (const auto& e : doc.at("edges")) graph.add_edge(e.at("a").get<VertexId>(), e.at("b").get<VertexId>());
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed graph JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("invalid graph JSON: ") + e.what());
  }
  return graph;
}

void save_graph_json(const std::filesystem::path& path, const SkeletonGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << graph_to_json(graph) << '\n';
}

SkeletonGraph load_graph_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("graph not found: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return graph_from_json(text);
}

void save_path_csv(const std::filesystem::path& path, const PlanResult& plan) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out.precision(12);
  out << "index,x,y,z\n";
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const auto& p = plan.waypoints[i];
    out << i << ',' << p.x() << ',' << p.y() << ',' << p.z() << '\n';
  }
}

void save_graph_obj(const std::filesystem::path& path, const SkeletonGraph& graph) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "# skeleton graph: " << graph.vertex_count() << " vertices, " << graph.edge_count()
      << " edges\n";
  for (const auto& v : graph.vertices())
    out << "v " << v.position.x() << ' ' << v.position.y() << ' ' << v.position.z() << '\n';
  for (const auto& e : graph.edges()) out << "l " << e.a + 1 << ' ' << e.b + 1 << '\n';
}

}  // namespace skelgen

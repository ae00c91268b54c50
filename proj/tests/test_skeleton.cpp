#include "oracles.hpp"
#include "scenes.hpp"
#include "support.hpp"

#include <doctest.h>

#include <queue>
#include <set>

using namespace skelgen;
using namespace skelgen::test;

namespace {

bool on_member_facet(const TriangleMesh& m, const Frontier& f, double tol) {
  for (auto i : f.facets) {
    const auto& t = m.facets[i];
    if (point_triangle_distance(f.center, m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) <= tol)
      return true;
  }
  return false;
}

/// Two 2x2-quad patches: floor z = 0 (x <= 0) and wall x = 0 (z >= 0), sharing the seam.
TriangleMesh corner_mesh() {
  TriangleMesh m;
  auto vid = [&](const Vec3& p) {
    for (std::uint32_t i = 0; i < m.vertices.size(); ++i)
      if ((m.vertices[i] - p).norm() < 1e-12) return i;
    m.vertices.push_back(p);
    return static_cast<std::uint32_t>(m.vertices.size() - 1);
  };
  auto quad = [&](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    m.facets.push_back({vid(a), vid(b), vid(c)});
    m.facets.push_back({vid(a), vid(c), vid(d)});
  };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      quad(Vec3(-i - 1, j, 0), Vec3(-i, j, 0), Vec3(-i, j + 1, 0), Vec3(-i - 1, j + 1, 0));
      quad(Vec3(0, j, i), Vec3(0, j, i + 1), Vec3(0, j + 1, i + 1), Vec3(0, j + 1, i));
    }
  for (const auto& f : m.facets)
    m.facet_normals.push_back(triangle_normal(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]));
  return m;
}

Polyhedron cube_poly(const Vec3& c, double h, NodeId owner) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(c + Vec3(i & 1 ? h : -h, i & 2 ? h : -h, i & 4 ? h : -h));
  const TriangleMesh m = convex_hull_mesh(pts);
  return map_polyhedron(m, m.vertices, owner);
}

std::size_t reachable_from(const SkeletonGraph& g, VertexId s) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::queue<VertexId> q;
  q.push(s);
  seen[s] = 1;
  std::size_t n = 0;
  while (!q.empty()) {
    const VertexId u = q.front();
    q.pop();
    ++n;
    for (const auto& [w, e] : g.neighbors(u))
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
  }
  return n;
}

}  // namespace

TEST_CASE("params validation") {
  GenerationParams p;
  CHECK_NOTHROW(p.validate());
  p.split_angle_threshold = 180.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = GenerationParams{};
  p.max_ray_length = 0.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = GenerationParams{};
  p.cycle_min_detour = -1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
}

// ---------------------------------------------------------------------------
// Frontier construction

TEST_CASE("sealed sphere of samples yields no frontiers") {
  const DirectionSet dirs = sample_unit_directions(128);
  const SampleSet s = synthetic_samples(Vec3::Zero(), dirs, [](const Vec3&) { return 1.0; });
  const auto built = build_poly_and_frontiers(0, Vec3::Zero(), s.black, s.white, dirs, example_params());
  CHECK(built.frontiers.empty());
  CHECK(detect_blind_frontiers(built.polyhedron, Vec3::Zero(), {}, 2.0, 60.0).empty());
}

TEST_CASE("hemisphere labeling yields exactly the rim facets") {
  const DirectionSet dirs = sample_unit_directions(128);
  const Vec3 c(1, 2, 3);
  const SampleSet s = synthetic_samples(c, dirs, hemisphere_range);
  const auto built = build_poly_and_frontiers(0, c, s.black, s.white, dirs, example_params());
  const auto expected = boundary_facet_oracle(built.polyhedron.mesh, s, dirs);
  REQUIRE_FALSE(expected.empty());

  std::set<std::uint32_t> got;
  std::size_t total = 0;
  for (const auto& f : built.frontiers) {
    CHECK_FALSE(f.blind);
    total += f.facets.size();
    got.insert(f.facets.begin(), f.facets.end());
  }
  CHECK(total == got.size());
  CHECK(got == expected);
  // The largest part is the flat lid facing the white side.
  CHECK(built.frontiers.front().normal.z() > 0.9);
}

TEST_CASE("opening wrapping a 90 degree corner splits at 60 degrees") {
  const DirectionSet dirs = sample_unit_directions(256);
  const SampleSet s = synthetic_samples(Vec3::Zero(), dirs, corner_slot_range);
  GenerationParams p = example_params();
  p.split_angle_threshold = 60.0;
  p.blind_distance_ratio = 100.0;
  const auto built = build_poly_and_frontiers(0, Vec3::Zero(), s.black, s.white, dirs, p);
  TriangleMesh sphere = built.unit_hull;

  REQUIRE(built.frontiers.size() >= 2);
  for (const auto& f : built.frontiers) CHECK(max_pairwise_angle(sphere, f.facets) <= 60.0 + 1e-9);

  // Without splitting the same opening is a single frontier spanning more than 60 degrees.
  p.split_angle_threshold = 179.0;
  const auto whole = build_poly_and_frontiers(0, Vec3::Zero(), s.black, s.white, dirs, p);
  REQUIRE(whole.frontiers.size() == 1);
  CHECK(max_pairwise_angle(sphere, whole.frontiers[0].facets) > 60.0);
}

TEST_CASE("split_frontier on constructed patches") {
  const TriangleMesh m = corner_mesh();
  Frontier all;
  for (std::uint32_t i = 0; i < m.facets.size(); ++i) all.facets.push_back(i);
  finalize_frontier(m, all);

  const auto parts = split_frontier(m, all, 60.0);
  REQUIRE(parts.size() == 2);
  std::set<std::uint32_t> uni;
  for (const auto& p : parts) {
    CHECK(max_pairwise_angle(m, p.facets) < 1e-9);
    CHECK(on_member_facet(m, p, 1e-6));
    CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
    uni.insert(p.facets.begin(), p.facets.end());
  }
  CHECK(uni.size() == m.facets.size());

  Frontier flat;
  for (std::uint32_t i = 0; i < m.facets.size(); ++i)
    if (m.facet_normals[i].z() > 0.5) flat.facets.push_back(i);
  finalize_frontier(m, flat);
  const auto same = split_frontier(m, flat, 60.0);
  REQUIRE(same.size() == 1);
  CHECK(same[0].facets == flat.facets);
  CHECK(same[0].normal.isApprox(Vec3::UnitZ()));
  CHECK(on_member_facet(m, same[0], 1e-6));
}

TEST_CASE("spike produces a blind frontier") {
  const DirectionSet dirs = sample_unit_directions(128);
  const std::size_t spike = 40;
  const SampleSet s = synthetic_samples(Vec3::Zero(), dirs, spike_range(dirs, spike));
  GenerationParams p = example_params();
  const auto built = build_poly_and_frontiers(0, Vec3::Zero(), s.black, s.white, dirs, p);
  std::uint32_t spike_vertex = 0;
  for (std::uint32_t i = 0; i < s.black.size(); ++i)
    if (s.black[i].source_direction == spike) spike_vertex = i;

  const auto blind = detect_blind_frontiers(built.polyhedron, Vec3::Zero(), {}, 2.0, 60.0);
  REQUIRE(blind.size() >= 1);
  for (const auto& f : blind) {
    CHECK(f.blind);
    for (auto facet : f.facets) {
      const auto& t = built.polyhedron.mesh.facets[facet];
      CHECK((t[0] == spike_vertex || t[1] == spike_vertex || t[2] == spike_vertex));
    }
  }
  REQUIRE(built.frontiers.size() >= 1);
  for (std::size_t i = 1; i < built.frontiers.size(); ++i)
    CHECK(built.frontiers[i - 1].facets.size() >= built.frontiers[i].facets.size());
}

// ---------------------------------------------------------------------------
// Verification and sampling

TEST_CASE("verify_frontier examples") {
  const PointCloudMap hall = room_map(Vec3(0, 0, 0), Vec3(10, 10, 10));
  const GenerationParams p = example_params();
  PolyhedronRegistry empty;

  Frontier open;
  open.center = Vec3(2, 5, 5);
  open.normal = Vec3::UnitX();
  open.parent_node = 0;
  const auto v = verify_frontier(open, hall, empty, p);
  CHECK(v.valid);
  REQUIRE(v.initial_position);
  CHECK((*v.initial_position - Vec3(4.5, 5, 5)).norm() < 1e-9);

  Frontier walled = open;
  walled.center = Vec3(9.2, 5, 5);
  CHECK_FALSE(verify_frontier(walled, hall, empty, p).valid);

  PolyhedronRegistry reg;
  reg.push(cube_poly(Vec3(3.4, 5, 5), 1.0, 3));
  Frontier blocked = open;
  blocked.center = Vec3(2, 5, 5);
  const auto b = verify_frontier(blocked, hall, reg, p);
  CHECK_FALSE(b.valid);
  CHECK(b.clear_distance == doctest::Approx(0.4));
}

TEST_CASE("generate_vertices examples") {
  const DirectionSet dirs = sample_unit_directions(128);
  const GenerationParams p = example_params();
  PolyhedronRegistry empty;

  const PointCloudMap chamber({}, make_box(Vec3::Constant(-10), Vec3::Constant(10)), 0.3);
  const SampleSet open = generate_vertices(Vec3::Zero(), dirs, chamber, empty, p);
  CHECK(open.black.empty());
  REQUIRE(open.white.size() == dirs.count());
  for (const auto& w : open.white) {
    CHECK(w.position.norm() == doctest::Approx(5.0));
    CHECK_FALSE(w.detected_polyhedron);
    CHECK(std::abs(w.projected_position.norm() - 1.0) < 1e-9);
  }

  std::vector<Vec3> plane;
  sample_rect(plane, Vec3(1, -6, -6), Vec3(0, 12, 0), Vec3(0, 0, 12), 0.05);
  const PointCloudMap wall(plane, make_box(Vec3::Constant(-6), Vec3::Constant(6)), 0.3);
  const SampleSet near = generate_vertices(Vec3::Zero(), dirs, wall, empty, p);
  int checked = 0;
  for (const auto& b : near.black) {
    const Vec3 d = dirs[b.source_direction];
    REQUIRE(d.x() > 0.0);
    const double expected = 0.7 / d.x();
    CHECK(std::abs(b.position.norm() - expected) <= wall.march_step() + 1e-9);
    ++checked;
  }
  for (const auto& w : near.white) CHECK(dirs[w.source_direction].x() < 0.7 / 5.0 + 1e-9);
  CHECK(checked > 20);

  PolyhedronRegistry reg;
  reg.push(cube_poly(Vec3(2, 0, 0), 0.5, 4));
  const SampleSet touching = generate_vertices(Vec3::Zero(), dirs, chamber, reg, p);
  int detected = 0;
  for (const auto& b : touching.black)
    if (b.detected_polyhedron == NodeId{4}) ++detected;
  CHECK(detected >= 1);
  for (const auto& w : touching.white) CHECK_FALSE(w.detected_polyhedron);
}

// ---------------------------------------------------------------------------
// Cycle formation

TEST_CASE("form_cycles proposals and revocation") {
  Node a;
  a.id = 0;
  a.center = Vec3::Zero();
  a.polyhedron = cube_poly(Vec3::Zero(), 1.0, 0);
  const TriangleMesh& m = a.polyhedron.mesh;
  Frontier face;
  face.parent_node = 0;
  for (std::uint32_t i = 0; i < m.facets.size(); ++i)
    if (m.facet_normals[i].x() > 0.99) face.facets.push_back(i);
  finalize_frontier(m, face);
  Frontier twin = face;
  twin.center = face.center + Vec3(0, 0.2, 0);
  a.frontiers = {face, twin};
  const std::vector<Node> nodes = {a};

  std::vector<VertexSample> black;
  for (double y : {-0.5, 0.0, 0.5})
    for (double z : {-0.5, 0.0, 0.5}) {
      VertexSample s;
      s.kind = SampleKind::Black;
      s.position = Vec3(1, y, z);
      s.detected_polyhedron = 0;
      black.push_back(s);
    }
  const Vec3 center(3, 0, 0);

  const PointCloudMap open({}, make_box(Vec3::Constant(-5), Vec3::Constant(5)), 0.3);
  CHECK(form_cycles(center, {}, nodes, open, std::nullopt).closures.empty());

  const CycleFormation ok = form_cycles(center, black, nodes, open, std::nullopt);
  REQUIRE(ok.closures.size() == 1);
  CHECK(ok.revoked == 0);
  CHECK(ok.closures[0].owner == 0);
  CHECK(ok.closures[0].frontier_index == 0);
  CHECK(ok.closures[0].sample_count == black.size());
  CHECK((ok.closures[0].gate_position - face.center).norm() < 1e-12);
  CHECK(form_cycles(center, black, nodes, open, NodeId{0}).closures.empty());

  const PointCloudMap gate_blocked({face.center}, make_box(Vec3::Constant(-5), Vec3::Constant(5)), 0.3);
  const CycleFormation g = form_cycles(center, black, nodes, gate_blocked, std::nullopt);
  CHECK(g.closures.empty());
  CHECK(g.revoked == 1);

  std::vector<Vec3> wall;
  sample_rect(wall, Vec3(2, -5, -5), Vec3(0, 10, 0), Vec3(0, 0, 10), 0.05);
  const PointCloudMap walled(wall, make_box(Vec3::Constant(-5), Vec3::Constant(5)), 0.3);
  REQUIRE(walled.is_free(face.center));
  const CycleFormation w = form_cycles(Vec3(2.5, 0, 0), black, nodes, walled, std::nullopt);
  CHECK(w.closures.empty());
  CHECK(w.revoked == 1);
}

// ---------------------------------------------------------------------------
// Whole generation

TEST_CASE("single empty room gives one node") {
  const PointCloudMap room = room_map(Vec3(0, 0, 0), Vec3(5, 5, 2.5));
  const Skeleton sk = generate_skeleton(room, Vec3(2.5, 2.5, 1.25), example_params());
  CHECK(sk.nodes.size() == 1);
  CHECK(sk.gates.empty());
  CHECK(sk.graph.edge_count() == 0);
}

TEST_CASE("two rooms joined by a door") {
  WorldSpec spec;
  spec.archetype = Archetype::Rooms;
  spec.extents = Vec3(10, 5, 2.5);
  const World w = generate_world(spec);
  for (const GenerationParams& p : {GenerationParams{}, example_params()}) {
    const Skeleton sk = generate_skeleton(w.cloud, Vec3(2.5, 2.5, 1.25), p);
    CHECK(sk.nodes.size() >= 2);
    CHECK(sk.gates.size() >= 1);
    CHECK(reachable_from(sk.graph, sk.nodes[0].vertex) == sk.graph.vertex_count());
    bool right_room = false;
    for (const auto& n : sk.nodes) right_room = right_room || n.center.x() > 5.2;
    CHECK(right_room);
  }
}

TEST_CASE("ring corridor closes a loop") {
  WorldSpec spec;
  spec.archetype = Archetype::RingCorridor;
  spec.extents = Vec3(20, 20, 2.5);
  const World w = generate_world(spec);
  const Skeleton sk = generate_skeleton(w.cloud, w.seed, GenerationParams{});
  CHECK(graph_metrics(sk.graph).cycle_rank >= 1);
  CHECK(sk.stats.cycles_formed >= 1);

  GenerationParams off;
  off.form_cycles = false;
  CHECK(graph_metrics(generate_skeleton(w.cloud, w.seed, off).graph).cycle_rank == 0);

  // Closures inside the barred corridor shrink to a point and are dropped.
  for (const double size : {20.0, 30.0}) {
    spec.extents = Vec3(size, size, 2.5);
    spec.ring_barrier = true;
    const World barred = generate_world(spec);
    CHECK(graph_metrics(generate_skeleton(barred.cloud, barred.seed, GenerationParams{}).graph).cycle_rank == 0);
  }
}

TEST_CASE("seed errors") {
  const PointCloudMap room = room_map(Vec3(0, 0, 0), Vec3(5, 5, 2.5));
  CHECK_THROWS_WITH_AS((void)generate_skeleton(room, Vec3(0.1, 2, 1), GenerationParams{}), "seed occupied",
                       InputError);
  CHECK_THROWS_WITH_AS((void)generate_skeleton(room, Vec3(9, 2, 1), GenerationParams{}),
                       "seed outside bounds", InputError);
}

TEST_CASE("dead-end expansion below the size threshold is rejected") {
  // From x = 1.5 the far end of the box is out of reach; from the verified
  // midpoint everything is within reach, so the second expansion sees no white.
  const PointCloudMap box = room_map(Vec3(0, 0, 0), Vec3(8, 3, 2.5));
  GenerationParams p = example_params();
  p.node_size_epsilon = 100.0;
  const Skeleton rejected = generate_skeleton(box, Vec3(1.5, 1.5, 1.25), p);
  CHECK(rejected.nodes.size() == 1);
  CHECK(rejected.stats.rejected_small >= 1);

  p.node_size_epsilon = 0.1;
  const Skeleton sealed = generate_skeleton(box, Vec3(1.5, 1.5, 1.25), p);
  CHECK(sealed.nodes.size() >= 2);
  CHECK(sealed.stats.rejected_small == 0);
  CHECK_FALSE(sealed.stats.hit_expansion_cap);
}

namespace {

void check_invariants(const Skeleton& sk, const CollisionOracle& map, const GenerationParams& p) {
  CHECK(graph_is_safe(sk.graph, map));
  const auto gm = graph_metrics(sk.graph);
  CHECK(gm.component_count == 1);
  CHECK(gm.vertex_count == sk.nodes.size() + sk.gates.size());
  CHECK(sk.graph.registry().size() == sk.nodes.size());
  CHECK(sk.stats.expansions <= p.max_expansions);
  CHECK_FALSE(sk.stats.hit_expansion_cap);

  for (const auto& n : sk.nodes) {
    if (n.parent) CHECK(*n.parent < n.id);
    double size = 0.0;
    for (const auto& b : n.black_samples) {
      size += (b.position - n.initial_center).norm();
      CHECK(std::abs((b.projected_position - n.initial_center).norm() - 1.0) < 1e-9);
      CHECK(b.kind == SampleKind::Black);
    }
    size /= static_cast<double>(n.black_samples.size());
    CHECK(n.size == doctest::Approx(size).epsilon(1e-9));
    CHECK(n.polyhedron.mesh.vertices.size() == n.black_samples.size());
    CHECK(n.polyhedron.owner_node == n.id);
    CHECK(euler_characteristic(n.polyhedron.mesh) == 2);
    CHECK(closed_two_manifold(n.polyhedron.mesh));
    for (std::size_t i = 1; i < n.frontiers.size(); ++i)
      CHECK(n.frontiers[i - 1].facets.size() >= n.frontiers[i].facets.size());
  }
  for (const auto& g : sk.gates) {
    CHECK(g.linked_nodes[0] != g.linked_nodes[1]);
    CHECK(sk.graph.neighbors(g.vertex).size() == 2);
  }
}

}  // namespace

TEST_CASE("generation invariants across archetypes and map kinds") {
  const std::vector<std::pair<Archetype, Vec3>> worlds = {
      {Archetype::Maze, Vec3(15, 15, 2.5)},
      {Archetype::Rooms, Vec3(15, 10, 2.5)},
      {Archetype::RingCorridor, Vec3(20, 20, 2.5)},
      {Archetype::MultiFloor, Vec3(20, 20, 6)},
  };
  const GenerationParams p;
  for (const auto& [arch, size] : worlds) {
    WorldSpec spec;
    spec.archetype = arch;
    spec.extents = size;
    const World w = generate_world(spec);
    for (const CollisionOracle* map : {static_cast<const CollisionOracle*>(&w.cloud),
                                       static_cast<const CollisionOracle*>(&w.grid)}) {
      CAPTURE(archetype_name(arch));
      const Skeleton sk = generate_skeleton(*map, w.seed, p);
      CHECK(sk.nodes.size() > 1);
      check_invariants(sk, *map, p);
      CHECK(graph_to_json(generate_skeleton(*map, w.seed, p).graph) == graph_to_json(sk.graph));
    }
  }
}

TEST_CASE("builder steps match the one-shot run") {
  WorldSpec spec;
  spec.archetype = Archetype::Rooms;
  spec.extents = Vec3(10, 10, 2.5);
  const World w = generate_world(spec);
  SkeletonBuilder b(w.cloud, GenerationParams{});
  b.initialize(w.seed);
  std::size_t steps = 0;
  while (b.step()) ++steps;
  CHECK(steps > 0);
  CHECK(b.pending() == 0);
  CHECK(graph_to_json(b.skeleton().graph) ==
        graph_to_json(generate_skeleton(w.cloud, w.seed, GenerationParams{}).graph));
}

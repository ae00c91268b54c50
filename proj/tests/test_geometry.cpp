#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>
#include <set>
#include <sstream>

using namespace skelgen;
using namespace skelgen::test;

TEST_CASE("direction sets") {
  const DirectionSet four = sample_unit_directions(4);
  REQUIRE(four.count() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(four[i].norm() - 1.0) < 1e-9);
    for (std::size_t j = i + 1; j < 4; ++j) CHECK(angle_deg(four[i], four[j]) > 1e-4);
  }
  CHECK_THROWS_AS((void)sample_unit_directions(3), InputError);

  const DirectionSet a = sample_unit_directions(256);
  const DirectionSet b = sample_unit_directions(256);
  CHECK(a.dirs() == b.dirs());

  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 probe = random_unit(rng);
    double best = 180.0;
    for (const auto& d : a.dirs()) best = std::min(best, angle_deg(probe, d));
    worst = std::max(worst, best);
  }
  CHECK(worst < 15.0);
}

TEST_CASE("fibonacci spacing is more even than uniform random") {
  auto nn_variance = [](const std::vector<Vec3>& dirs) {
    std::vector<double> nn;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      double best = 180.0;
      for (std::size_t j = 0; j < dirs.size(); ++j)
        if (i != j) best = std::min(best, angle_deg(dirs[i], dirs[j]));
      nn.push_back(best);
    }
    double mean = 0.0;
    for (double x : nn) mean += x;
    mean /= static_cast<double>(nn.size());
    double var = 0.0;
    for (double x : nn) var += (x - mean) * (x - mean);
    return var / static_cast<double>(nn.size());
  };
  std::mt19937_64 rng(4);
  std::vector<Vec3> random_dirs;
  for (int i = 0; i < 256; ++i) random_dirs.push_back(random_unit(rng));
  CHECK(nn_variance(sample_unit_directions(256).dirs()) < nn_variance(random_dirs));
}

TEST_CASE("direction neighborhoods are symmetric hull edges") {
  const DirectionSet dirs = sample_unit_directions(128);
  const TriangleMesh hull = convex_hull_mesh(dirs.dirs());
  const auto adjacency = hull.vertex_adjacency();
  for (std::size_t i = 0; i < dirs.count(); ++i) {
    CHECK(dirs.neighbors(i) == adjacency[i]);
    for (auto j : dirs.neighbors(i)) {
      const auto& back = dirs.neighbors(j);
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
}

TEST_CASE("projection onto the unit sphere") {
  CHECK(project_to_unit_sphere(Vec3(0, 0, 0), Vec3(2, 0, 0)).isApprox(Vec3(1, 0, 0)));
  CHECK(project_to_unit_sphere(Vec3(1, 1, 1), Vec3(1, 1, 4)).isApprox(Vec3(1, 1, 2)));
  CHECK_THROWS_AS((void)project_to_unit_sphere(Vec3(1, 2, 3), Vec3(1, 2, 3)), GeometryError);

  std::mt19937_64 rng(6);
  const Aabb box = make_box(Vec3::Constant(-100), Vec3::Constant(100));
  for (int i = 0; i < 10000; ++i) {
    const Vec3 c = random_in(rng, box);
    const Vec3 p = random_in(rng, box);
    const Vec3 q = project_to_unit_sphere(c, p);
    CHECK(std::abs((q - c).norm() - 1.0) <= 1e-12);
    CHECK((project_to_unit_sphere(c, q) - q).norm() <= 1e-12);
  }
}

TEST_CASE("hull of known polytopes") {
  const std::vector<Vec3> octa = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
                                  Vec3(0, -1, 0), Vec3(0, 0, 1),  Vec3(0, 0, -1)};
  CHECK(convex_hull_mesh(octa).facets.size() == 8);

  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  const TriangleMesh c = convex_hull_mesh(cube);
  CHECK(c.facets.size() == 12);
  CHECK(mesh_volume(c) == doctest::Approx(8.0).epsilon(1e-12));

  std::mt19937_64 rng(8);
  std::vector<Vec3> sphere;
  for (int i = 0; i < 100; ++i) sphere.push_back(random_unit(rng));
  const TriangleMesh s = convex_hull_mesh(sphere);
  CHECK(s.referenced_vertex_count() == 100);
  CHECK(mesh_volume(s) < 4.0 / 3.0 * std::numbers::pi);
  CHECK(hull_violations(s, sphere) == 0);

  CHECK_THROWS_AS((void)convex_hull_mesh(std::vector<Vec3>(octa.begin(), octa.begin() + 3)),
                  GeometryError);
}

TEST_CASE("hull matches brute-force facet enumeration") {
  std::mt19937_64 rng(10);
  for (int set = 0; set < 200; ++set) {
    std::uniform_int_distribution<int> count(4, 16);
    std::vector<Vec3> pts;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) pts.push_back(random_in(rng, make_box(Vec3::Constant(-1), Vec3::Constant(1))));
    const TriangleMesh h = convex_hull_mesh(pts);
    CHECK(hull_violations(h, pts) == 0);
    CHECK(euler_characteristic(h) == 2);
    CHECK(closed_two_manifold(h));
    CHECK(sorted_facets(h) == brute_force_hull_facets(pts));
  }
}

TEST_CASE("coplanar input survives one jitter retry") {
  std::vector<Vec3> square = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(0.5, 0.5, 0)};
  const TriangleMesh h = convex_hull_mesh(square);
  CHECK(h.facets.size() >= 4);
  CHECK(mesh_volume(h) < 1e-6);
}

TEST_CASE("ray against a unit cube") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5);
  const TriangleMesh m = convex_hull_mesh(cube);
  const auto hit = ray_mesh_intersect(Vec3(-2, 0, 0), Vec3::UnitX(), 10.0, m);
  REQUIRE(hit);
  CHECK(hit->distance == doctest::Approx(1.5));
  CHECK(m.facet_normals[hit->facet].isApprox(-Vec3::UnitX()));
  CHECK_FALSE(ray_mesh_intersect(Vec3(-2, 2, 0), Vec3::UnitX(), 10.0, m));
  CHECK_FALSE(ray_mesh_intersect(Vec3(-2, 0, 0), Vec3::UnitX(), 1.0, m));
}

TEST_CASE("ray-mesh agrees with the exhaustive triangle oracle") {
  std::mt19937_64 rng(12);
  std::vector<Vec3> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(random_in(rng, make_box(Vec3::Constant(-1), Vec3::Constant(1))));
  const TriangleMesh m = convex_hull_mesh(pts);
  CHECK(ray_mesh_mismatches(m, 500, rng) == 0);
}

TEST_CASE("mapped polyhedron keeps the hull topology") {
  const DirectionSet dirs = sample_unit_directions(64);
  const TriangleMesh hull = convex_hull_mesh(dirs.dirs());
  std::vector<Vec3> pos;
  for (std::size_t i = 0; i < dirs.count(); ++i) pos.push_back(dirs[i] * (1.0 + 0.5 * (i % 3)));
  const Polyhedron p = map_polyhedron(hull, pos, 7);
  CHECK(p.owner_node == 7);
  CHECK(p.mesh.facets == hull.facets);
  CHECK(p.mesh.vertices == pos);
  for (const auto& n : p.mesh.facet_normals) CHECK(std::abs(n.norm() - 1.0) < 1e-9);
}

TEST_CASE("registry raycast and containment") {
  auto cube_at = [](const Vec3& c, double h, NodeId owner) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(c + Vec3(i & 1 ? h : -h, i & 2 ? h : -h, i & 4 ? h : -h));
    const TriangleMesh m = convex_hull_mesh(pts);
    return map_polyhedron(m, m.vertices, owner);
  };
  PolyhedronRegistry reg;
  reg.push(cube_at(Vec3(0, 0, 0), 1.0, 0));
  reg.push(cube_at(Vec3(5, 0, 0), 1.0, 1));

  const auto hit = reg.raycast(Vec3(2.5, 0, 0), Vec3::UnitX(), 10.0);
  REQUIRE(hit);
  CHECK(hit->distance == doctest::Approx(1.5));
  CHECK(hit->owner == 1);
  const auto back = reg.raycast(Vec3(2.5, 0, 0), -Vec3::UnitX(), 10.0);
  REQUIRE(back);
  CHECK(back->owner == 0);
  CHECK_FALSE(reg.raycast(Vec3(2.5, 0, 0), Vec3::UnitY(), 10.0));

  std::mt19937_64 rng(14);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 q = random_in(rng, make_box(Vec3(-2, -2, -2), Vec3(7, 2, 2)));
    const bool in0 = (q.cwiseAbs().array() < 1.0).all();
    const bool in1 = ((q - Vec3(5, 0, 0)).cwiseAbs().array() < 1.0).all();
    CHECK(reg.contains(q) == (in0 || in1));
    CHECK(reg.contains(q, NodeId{0}) == in1);
  }
}

TEST_CASE("OBJ export writes one record per vertex and facet") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const TriangleMesh m = convex_hull_mesh(cube);
  std::ostringstream out;
  const std::size_t offset = write_obj(out, m, 3, "cube");
  CHECK(offset == 11);
  const std::string text = out.str();
  std::size_t v = 0;
  std::size_t f = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
  }
  CHECK(v == 8);
  CHECK(f == 12);
}

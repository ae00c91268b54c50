#include <skelgen/graph.hpp>
#include <skelgen/skeleton.hpp>
#include <skelgen/worldgen.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace skelgen;

namespace {

const World& maze() {
  static const World w = [] {
    WorldSpec spec;
    spec.extents = Vec3(30, 30, 2.5);
    return generate_world(spec);
  }();
  return w;
}

const Skeleton& maze_skeleton() {
  static const Skeleton sk = generate_skeleton(maze().cloud, maze().seed, GenerationParams{});
  return sk;
}

std::vector<std::pair<Vec3, Vec3>> maze_pairs(int n) {
  const World& w = maze();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    for (;;) {
      Vec3 q;
      for (int a = 0; a < 3; ++a) q[a] = w.bounds.min[a] + u(rng) * w.bounds.extent()[a];
      q = w.grid.voxel_center(w.grid.voxel_of(q));
      if (w.grid.traversable(w.grid.voxel_of(q)) && w.cloud.is_free(q)) return q;
    }
  };
  std::vector<std::pair<Vec3, Vec3>> out;
  for (int i = 0; i < n; ++i) out.emplace_back(draw(), draw());
  return out;
}

void BM_ConvexHull(benchmark::State& state) {
  const DirectionSet dirs = sample_unit_directions(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(0.5, 2.0);
  std::vector<Vec3> pts;
  for (const auto& d : dirs.dirs()) pts.push_back(d * r(rng));
  for (auto _ : state) benchmark::DoNotOptimize(convex_hull_mesh(pts));
}
BENCHMARK(BM_ConvexHull)->Arg(64)->Arg(256)->Arg(1024);

void BM_Raycast(benchmark::State& state) {
  const World& w = maze();
  const CollisionOracle& map = state.range(0) == 0 ? static_cast<const CollisionOracle&>(w.cloud)
                                                   : static_cast<const CollisionOracle&>(w.grid);
  const DirectionSet dirs = sample_unit_directions(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(map.raycast_occupied(w.seed, dirs[i % dirs.count()], 2.0));
    ++i;
  }
  state.SetLabel(state.range(0) == 0 ? "cloud" : "grid");
}
BENCHMARK(BM_Raycast)->Arg(0)->Arg(1);

void BM_Generate(benchmark::State& state) {
  const World& w = maze();
  for (auto _ : state) benchmark::DoNotOptimize(generate_skeleton(w.cloud, w.seed, GenerationParams{}));
  state.SetLabel("maze 30x30");
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_GraphAstar(benchmark::State& state) {
  const auto pairs = maze_pairs(20);
  const Skeleton& sk = maze_skeleton();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(plan_astar(sk.graph, a, b, maze().cloud));
  }
}
BENCHMARK(BM_GraphAstar)->Unit(benchmark::kMicrosecond);

void BM_GridAstar(benchmark::State& state) {
  const auto pairs = maze_pairs(20);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(grid_astar(maze().grid, a, b));
  }
}
BENCHMARK(BM_GridAstar)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

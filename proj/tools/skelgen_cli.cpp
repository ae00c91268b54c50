#include <skelgen/config.hpp>
#include <skelgen/graph.hpp>
#include <skelgen/map.hpp>
#include <skelgen/skeleton.hpp>
#include <skelgen/worldgen.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace skelgen;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kInput = 2, kPlanning = 3 };

struct MapOptions {
  std::string map_path;
  std::string world;
  std::string world_spec;
  std::string size;
  std::uint64_t world_seed = 1;
  double noise = 0.0;
  std::string map_kind = "cloud";
  double clearance = 0.3;
  double voxel = 0.25;
};

struct LoadedMap {
  std::optional<World> world;
  std::unique_ptr<CollisionOracle> owned;
  const CollisionOracle* map = nullptr;
  std::optional<OccupancyGridMap> grid_for_oracle;
};

void add_map_options(CLI::App* cmd, MapOptions& o) {
  cmd->add_option("--map", o.map_path, "Map file: .ply/.xyz point cloud or .json grid");
  cmd->add_option("--world", o.world, "Synthesize a world: maze, rooms, ring, multifloor");
  cmd->add_option("--world-spec", o.world_spec, "World spec file (.json or .toml)");
  cmd->add_option("--size", o.size, "World extents WxDxH in meters, e.g. 60x60x2.5");
  cmd->add_option("--world-seed", o.world_seed, "World layout and noise seed")->capture_default_str();
  cmd->add_option("--noise", o.noise, "Outlier density in points/m^3")->capture_default_str();
  cmd->add_option("--map-kind", o.map_kind, "Rendering of a synthesized world used for generation")
      ->check(CLI::IsMember({"cloud", "grid"}))
      ->capture_default_str();
  cmd->add_option("--clearance", o.clearance, "Robot radius in meters")->capture_default_str();
  cmd->add_option("--voxel", o.voxel, "Voxel size of synthesized or oracle grids")->capture_default_str();
}

Vec3 parse_triplet(const std::string& text, char sep, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(std::string("cannot parse ") + what + ": " + text);
    }
  }
  if (v.size() != 3) throw InputError(std::string(what) + " needs 3 values: " + text);
  return Vec3(v[0], v[1], v[2]);
}

WorldSpec world_spec_from(const MapOptions& o) {
  WorldSpec spec;
  if (!o.world_spec.empty()) spec = load_world_spec(o.world_spec);
  if (!o.world.empty()) spec.archetype = parse_archetype(o.world);
  if (!o.size.empty()) spec.extents = parse_triplet(o.size, 'x', "--size");
  if (o.world_spec.empty()) {
    spec.rng_seed = o.world_seed;
    spec.noise_density = o.noise;
    spec.clearance = o.clearance;
    spec.voxel_size = o.voxel;
  }
  spec.validate();
  return spec;
}

LoadedMap load_map_source(const MapOptions& o) {
  const bool from_file = !o.map_path.empty();
  const bool from_world = !o.world.empty() || !o.world_spec.empty();
  if (from_file == from_world)
    throw InputError("exactly one map source required: --map or --world/--world-spec");
  LoadedMap out;
  if (from_file) {
    out.owned = load_map(o.map_path, o.clearance);
    out.map = out.owned.get();
    return out;
  }
  out.world = generate_world(world_spec_from(o));
  out.map = o.map_kind == "grid" ? static_cast<const CollisionOracle*>(&out.world->grid)
                                 : static_cast<const CollisionOracle*>(&out.world->cloud);
  return out;
}

// Grid used by the A* oracle: the synthesized grid, the loaded grid, or a voxelized cloud.
const OccupancyGridMap& oracle_grid(LoadedMap& m, const MapOptions& o) {
  if (m.world) return m.world->grid;
  if (const auto* g = dynamic_cast<const OccupancyGridMap*>(m.map)) return *g;
  if (!m.grid_for_oracle) {
    const auto& cloud = dynamic_cast<const PointCloudMap&>(*m.map);
    const OccupancyGridMap raw = voxelize(cloud, o.voxel);
    m.grid_for_oracle.emplace(raw.origin(), raw.voxel_size(), raw.dims(), raw.occupancy(), o.clearance);
  }
  return *m.grid_for_oracle;
}

Vec3 seed_position(const LoadedMap& m, const std::string& seed_pos) {
  if (seed_pos == "auto") {
    if (m.world) return m.world->seed;
    return find_free_position(*m.map, m.map->bounds().center());
  }
  return parse_triplet(seed_pos, ',', "--seed-pos");
}

GenerationParams params_from(const std::string& path, double clearance) {
  GenerationParams base;
  base.clearance = clearance;
  return path.empty() ? base : load_params(path, base);
}

json params_echo(const GenerationParams& p) { return json::parse(params_to_text(p, ConfigFormat::Json)); }

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  MapOptions map;
  std::string out = "world";
  std::string format = "ply";
};

int cmd_synth(const SynthOptions& o) {
  const WorldSpec spec = world_spec_from(o.map);
  const World w = generate_world(spec);
  const fs::path dir(o.out);
  ensure_dir(dir);
  const fs::path cloud_path = dir / (o.format == "xyz" ? "cloud.xyz" : "cloud.ply");
  if (o.format == "xyz")
    save_point_cloud_xyz(cloud_path, w.cloud.points());
  else
    save_point_cloud_ply(cloud_path, w.cloud.points());
  save_grid_map(dir / "grid.json", w.grid);
  save_world_spec(dir / "world.json", spec);

  json summary;
  summary["archetype"] = archetype_name(spec.archetype);
  summary["points"] = w.cloud.points().size();
  summary["voxels"] = w.grid.voxel_count();
  summary["solids"] = w.solids.size();
  summary["seed"] = vec_json(w.seed);
  summary["cloud"] = cloud_path.string();
  summary["grid"] = (dir / "grid.json").string();
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

struct GenerateOptions {
  MapOptions map;
  std::string params;
  std::string seed_pos = "auto";
  std::string out = "out";
  bool polyhedra = true;
};

json stats_json(const Skeleton& sk, const GenerationParams& p, const Vec3& seed) {
  const auto m = graph_metrics(sk.graph);
  json s;
  s["generation_seconds"] = sk.stats.seconds;
  s["vertices"] = m.vertex_count;
  s["edges"] = m.edge_count;
  s["nodes"] = sk.nodes.size();
  s["gates"] = sk.gates.size();
  s["components"] = m.component_count;
  s["cycle_rank"] = m.cycle_rank;
  s["seed"] = vec_json(seed);
  s["expansions"] = sk.stats.expansions;
  s["frontiers_popped"] = sk.stats.frontiers_popped;
  s["frontiers_invalid"] = sk.stats.frontiers_invalid;
  s["rejected_small"] = sk.stats.rejected_small;
  s["rejected_degenerate"] = sk.stats.rejected_degenerate;
  s["rejected_connection"] = sk.stats.rejected_connection;
  s["cycles_formed"] = sk.stats.cycles_formed;
  s["cycles_revoked"] = sk.stats.cycles_revoked;
  s["cycles_redundant"] = sk.stats.cycles_redundant;
  s["hit_expansion_cap"] = sk.stats.hit_expansion_cap;
  s["params"] = params_echo(p);
  return s;
}

int cmd_generate(const GenerateOptions& o) {
  LoadedMap m = load_map_source(o.map);
  const GenerationParams params = params_from(o.params, o.map.clearance);
  const Vec3 seed = seed_position(m, o.seed_pos);
  const Skeleton sk = generate_skeleton(*m.map, seed, params);

  const fs::path dir(o.out);
  ensure_dir(dir);
  save_graph_json(dir / "graph.json", sk.graph);
  if (o.polyhedra) save_polyhedra_obj(dir / "polyhedra.obj", sk);
  const json stats = stats_json(sk, params, seed);
  write_text(dir / "stats.json", stats.dump(2) + "\n");
  std::cout << stats.dump(2) << '\n';
  return kOk;
}

struct PlanOptions {
  MapOptions map;
  std::string graph;
  std::string params;
  std::string seed_pos = "auto";
  std::string start;
  std::string goal;
  std::string out = "path.csv";
  bool oracle = false;
};

int cmd_plan(const PlanOptions& o) {
  LoadedMap m = load_map_source(o.map);
  const Vec3 start = parse_triplet(o.start, ',', "--start");
  const Vec3 goal = parse_triplet(o.goal, ',', "--goal");
  SkeletonGraph graph;
  if (!o.graph.empty()) {
    graph = load_graph_json(o.graph);
  } else {
    const GenerationParams params = params_from(o.params, o.map.clearance);
    graph = generate_skeleton(*m.map, seed_position(m, o.seed_pos), params).graph;
  }

  const PlanResult plan = plan_astar(graph, start, goal, *m.map);
  save_path_csv(o.out, plan);
  json r;
  r["graph_length_m"] = plan.length;
  r["graph_ms"] = plan.elapsed_seconds * 1e3;
  r["waypoints"] = plan.waypoints.size();
  r["expanded"] = plan.expanded_count;
  if (o.oracle) {
    const PlanResult grid = grid_astar(oracle_grid(m, o.map), start, goal);
    r["grid_length_m"] = grid.length;
    r["grid_ms"] = grid.elapsed_seconds * 1e3;
    r["grid_expanded"] = grid.expanded_count;
    r["length_ratio"] = grid.length > 0.0 ? plan.length / grid.length : 1.0;
  }
  r["path_csv"] = o.out;
  std::cout << r.dump(2) << '\n';
  return kOk;
}

struct BenchOptions {
  MapOptions map;
  std::string params;
  std::string seed_pos = "auto";
  int runs = 10;
  int pairs = 20;
  std::uint64_t rng_seed = 1;
  std::string out;
  bool oracle = false;
  bool no_timing = false;
};

struct Moments {
  double avg = 0, std = 0, max = 0, min = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0;
  for (double x : v) sum += x;
  m.avg = sum / static_cast<double>(v.size());
  double sq = 0;
  for (double x : v) sq += (x - m.avg) * (x - m.avg);
  m.std = std::sqrt(sq / static_cast<double>(v.size()));
  m.max = *std::max_element(v.begin(), v.end());
  m.min = *std::min_element(v.begin(), v.end());
  return m;
}

// Free query points drawn uniformly inside the bounds. Synthesized worlds also
// require a traversable grid voxel, which excludes the hollow cloud interiors.
std::vector<std::pair<Vec3, Vec3>> draw_pairs(const LoadedMap& m, int count, std::uint64_t seed) {
  const CollisionOracle& map = *m.map;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Aabb& b = map.bounds();
  auto draw = [&] {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vec3 q;
      for (int a = 0; a < 3; ++a) q[a] = b.min[a] + unit(rng) * b.extent()[a];
      if (map.is_free(q) && (!m.world || m.world->grid.traversable(m.world->grid.voxel_of(q)))) return q;
    }
    throw InputError("no free query points found in the map");
  };
  std::vector<std::pair<Vec3, Vec3>> out;
  for (int i = 0; i < count; ++i) {
    const Vec3 a = draw();
    const Vec3 c = draw();
    out.emplace_back(a, c);
  }
  return out;
}

int cmd_bench(const BenchOptions& o) {
  if (o.runs < 1) throw InputError("--runs must be at least 1");
  if (o.pairs < 0) throw InputError("--pairs must be non-negative");
  LoadedMap m = load_map_source(o.map);
  const GenerationParams params = params_from(o.params, o.map.clearance);
  const Vec3 seed = seed_position(m, o.seed_pos);
  const auto pairs = draw_pairs(m, o.pairs, o.rng_seed);

  std::vector<std::string> header = {"generation_s", "vertices", "edges", "nodes", "gates",
                                     "plan_ms_avg", "plan_ms_std", "plan_ms_max", "plan_ms_min",
                                     "path_m_avg", "solved"};
  if (o.oracle) {
    header.insert(header.end(), {"grid_ms_avg", "grid_ms_std", "grid_ms_max", "grid_ms_min",
                                 "grid_path_m_avg", "grid_solved"});
  }
  auto timing = [](const std::string& col) {
    return col == "generation_s" || col.starts_with("plan_ms") || col.starts_with("grid_ms");
  };
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!o.no_timing || !timing(header[i])) kept.push_back(i);

  // Grid A* does not depend on the skeleton; solve once.
  std::vector<double> grid_ms;
  std::vector<double> grid_len;
  if (o.oracle) {
    const OccupancyGridMap& grid = oracle_grid(m, o.map);
    for (const auto& [a, b] : pairs) {
      try {
        const PlanResult r = grid_astar(grid, a, b);
        grid_ms.push_back(r.elapsed_seconds * 1e3);
        grid_len.push_back(r.length);
      } catch (const std::runtime_error&) {
      }
    }
  }

  std::vector<std::vector<double>> rows;
  for (int run = 0; run < o.runs; ++run) {
    const Skeleton sk = generate_skeleton(*m.map, seed, params);
    std::vector<double> ms;
    std::vector<double> len;
    for (const auto& [a, b] : pairs) {
      try {
        const PlanResult r = plan_astar(sk.graph, a, b, *m.map);
        ms.push_back(r.elapsed_seconds * 1e3);
        len.push_back(r.length);
      } catch (const std::runtime_error&) {
      }
    }
    const Moments t = moments(ms);
    std::vector<double> row = {sk.stats.seconds,
                               static_cast<double>(sk.graph.vertex_count()),
                               static_cast<double>(sk.graph.edge_count()),
                               static_cast<double>(sk.nodes.size()),
                               static_cast<double>(sk.gates.size()),
                               t.avg, t.std, t.max, t.min,
                               moments(len).avg,
                               static_cast<double>(ms.size())};
    if (o.oracle) {
      const Moments g = moments(grid_ms);
      row.insert(row.end(), {g.avg, g.std, g.max, g.min, moments(grid_len).avg,
                             static_cast<double>(grid_ms.size())});
    }
    rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << std::setprecision(17);
  csv << "run";
  for (auto i : kept) csv << ',' << header[i];
  csv << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    csv << r;
    for (auto i : kept) csv << ',' << rows[r][i];
    csv << '\n';
  }
  csv << "summary";
  for (auto i : kept) {
    double sum = 0;
    for (const auto& row : rows) sum += row[i];
    csv << ',' << sum / static_cast<double>(rows.size());
  }
  csv << '\n';

  if (o.out.empty())
    std::cout << csv.str();
  else
    write_text(o.out, csv.str());
  return kOk;
}

struct ExportOptions {
  MapOptions map;
  std::string graph;
  std::string params;
  std::string seed_pos = "auto";
  std::string out = "out";
};

int cmd_export_obj(const ExportOptions& o) {
  const fs::path dir(o.out);
  if (!o.graph.empty() && o.map.map_path.empty() && o.map.world.empty() && o.map.world_spec.empty()) {
    ensure_dir(dir);
    save_graph_obj(dir / "graph.obj", load_graph_json(o.graph));
    std::cout << (dir / "graph.obj").string() << '\n';
    return kOk;
  }
  LoadedMap m = load_map_source(o.map);
  const GenerationParams params = params_from(o.params, o.map.clearance);
  const Skeleton sk = generate_skeleton(*m.map, seed_position(m, o.seed_pos), params);
  ensure_dir(dir);
  save_polyhedra_obj(dir / "polyhedra.obj", sk);
  save_graph_obj(dir / "graph.obj", sk.graph);
  std::cout << (dir / "polyhedra.obj").string() << '\n' << (dir / "graph.obj").string() << '\n';
  return kOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const PlanningError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPlanning;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse skeleton graph generation and planning"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic world as point cloud, grid and spec");
  add_map_options(s, synth.map);
  s->add_option("--out", synth.out, "Output directory")->capture_default_str();
  s->add_option("--format", synth.format, "Point cloud format")
      ->check(CLI::IsMember({"ply", "xyz"}))
      ->capture_default_str();

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a skeleton graph");
  add_map_options(g, gen.map);
  g->add_option("--params", gen.params, "Generation params file (.json or .toml)");
  g->add_option("--seed-pos", gen.seed_pos, "Seed position x,y,z or auto")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();
  g->add_flag("!--no-polyhedra", gen.polyhedra, "Skip the polyhedra OBJ");

  PlanOptions plan;
  auto* p = app.add_subcommand("plan", "Plan on a skeleton graph");
  add_map_options(p, plan.map);
  p->add_option("--graph", plan.graph, "Graph JSON; generated in-process when omitted");
  p->add_option("--params", plan.params, "Generation params file when no graph is given");
  p->add_option("--seed-pos", plan.seed_pos, "Seed position when no graph is given")->capture_default_str();
  p->add_option("--start", plan.start, "Start x,y,z")->required();
  p->add_option("--goal", plan.goal, "Goal x,y,z")->required();
  p->add_option("--out", plan.out, "Path CSV")->capture_default_str();
  p->add_flag("--oracle", plan.oracle, "Also run grid A* and report the length ratio");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Repeat generation and planning, emit CSV statistics");
  add_map_options(b, bench.map);
  b->add_option("--params", bench.params, "Generation params file (.json or .toml)");
  b->add_option("--seed-pos", bench.seed_pos, "Seed position x,y,z or auto")->capture_default_str();
  b->add_option("--runs", bench.runs, "Generation runs")->capture_default_str();
  b->add_option("--pairs", bench.pairs, "Random planning pairs per run")->capture_default_str();
  b->add_option("--rng-seed", bench.rng_seed, "Seed of the query-pair sampler")->capture_default_str();
  b->add_option("--out", bench.out, "CSV file; stdout when omitted");
  b->add_flag("--oracle", bench.oracle, "Add grid A* columns");
  b->add_flag("--no-timing", bench.no_timing, "Drop wall-clock columns");

  ExportOptions exp;
  auto* e = app.add_subcommand("export-obj", "Export polyhedra and graph as OBJ");
  add_map_options(e, exp.map);
  e->add_option("--graph", exp.graph, "Graph JSON to convert without a map");
  e->add_option("--params", exp.params, "Generation params file (.json or .toml)");
  e->add_option("--seed-pos", exp.seed_pos, "Seed position x,y,z or auto")->capture_default_str();
  e->add_option("--out", exp.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInput;
  }

  if (s->parsed()) return guarded([&] { return cmd_synth(synth); });
  if (g->parsed()) return guarded([&] { return cmd_generate(gen); });
  if (p->parsed()) return guarded([&] { return cmd_plan(plan); });
  if (b->parsed()) return guarded([&] { return cmd_bench(bench); });
  if (e->parsed()) return guarded([&] { return cmd_export_obj(exp); });
  return kInternal;
}

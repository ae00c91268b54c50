#include "support.hpp"

#include <skelgen/config.hpp>

#include <doctest.h>

#include <fstream>

using namespace skelgen;
using namespace skelgen::test;

namespace {

GenerationParams odd_params() {
  GenerationParams p;
  p.ray_count = 128;
  p.max_ray_length = 5.0;
  p.frontier_clear_distance = 1.0;
  p.node_size_epsilon = 0.25;
  p.split_angle_threshold = 60.0;
  p.blind_distance_ratio = 2.0;
  p.clearance = 0.35;
  p.form_cycles = false;
  p.cycle_min_detour = 0.0;
  p.max_expansions = 1234;
  return p;
}

void check_same(const GenerationParams& a, const GenerationParams& b) {
  CHECK(a.ray_count == b.ray_count);
  CHECK(a.max_ray_length == b.max_ray_length);
  CHECK(a.frontier_clear_distance == b.frontier_clear_distance);
  CHECK(a.node_size_epsilon == b.node_size_epsilon);
  CHECK(a.split_angle_threshold == b.split_angle_threshold);
  CHECK(a.blind_distance_ratio == b.blind_distance_ratio);
  CHECK(a.clearance == b.clearance);
  CHECK(a.form_cycles == b.form_cycles);
  CHECK(a.cycle_min_detour == b.cycle_min_detour);
  CHECK(a.max_expansions == b.max_expansions);
}

}  // namespace

TEST_CASE("format follows the file extension") {
  CHECK(format_for("a/params.toml") == ConfigFormat::Toml);
  CHECK(format_for("params.json") == ConfigFormat::Json);
  CHECK(format_for("params") == ConfigFormat::Json);
}

TEST_CASE("generation params round-trip through JSON and TOML") {
  const GenerationParams p = odd_params();
  for (const ConfigFormat f : {ConfigFormat::Json, ConfigFormat::Toml}) {
    const std::string text = params_to_text(p, f);
    check_same(params_from_text(text, f), p);
  }
  const auto dir = scratch_dir("config_params");
  save_params(dir / "p.toml", p);
  save_params(dir / "p.json", p);
  check_same(load_params(dir / "p.toml"), p);
  check_same(load_params(dir / "p.json"), p);
}

TEST_CASE("partial documents keep the base values") {
  const GenerationParams p = params_from_text("# comment\n[generation]\nray_count = 64\nform_cycles = false\n",
                                              ConfigFormat::Toml);
  CHECK(p.ray_count == 64);
  CHECK_FALSE(p.form_cycles);
  CHECK(p.max_ray_length == GenerationParams{}.max_ray_length);

  const GenerationParams q = params_from_text(R"({"clearance": 0.5})", ConfigFormat::Json, odd_params());
  CHECK(q.clearance == 0.5);
  CHECK(q.ray_count == 128);
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS((void)params_from_text(R"({"rays": 3})", ConfigFormat::Json),
                       doctest::Contains("unknown config key: rays"), InputError);
  CHECK_THROWS_WITH_AS((void)params_from_text(R"({"ray_count": "many"})", ConfigFormat::Json),
                       doctest::Contains("wrong type"), InputError);
  CHECK_THROWS_AS((void)params_from_text("[1, 2]", ConfigFormat::Json), InputError);
  CHECK_THROWS_AS((void)params_from_text("{", ConfigFormat::Json), InputError);
  CHECK_THROWS_WITH_AS((void)params_from_text("ray_count 5\n", ConfigFormat::Toml),
                       doctest::Contains("line 1"), InputError);
  CHECK_THROWS_AS((void)params_from_text("bogus = 1\n", ConfigFormat::Toml), InputError);
  CHECK_THROWS_AS((void)world_from_text(R"({"extents": [1, 2]})", ConfigFormat::Json), InputError);
  CHECK_THROWS_AS((void)world_from_text(R"({"archetype": "castle"})", ConfigFormat::Json), InputError);
  CHECK_THROWS_WITH_AS((void)load_params(scratch_dir("config_missing") / "none.toml"),
                       doctest::Contains("not found"), InputError);
}

TEST_CASE("world spec round-trips through JSON and TOML") {
  WorldSpec s;
  s.archetype = Archetype::RingCorridor;
  s.extents = Vec3(22, 18, 3);
  s.wall_thickness = 0.2;
  s.surface_point_density = 80;
  s.rng_seed = 99;
  s.noise_density = 0.05;
  s.cell_size = 3.0;
  s.room_size = 6.0;
  s.door_width = 1.5;
  s.corridor_width = 2.5;
  s.ring_barrier = true;
  s.voxel_size = 0.2;
  s.clearance = 0.25;
  for (const ConfigFormat f : {ConfigFormat::Json, ConfigFormat::Toml}) {
    const WorldSpec r = world_from_text(world_to_text(s, f), f);
    CHECK(r.archetype == s.archetype);
    CHECK(r.extents == s.extents);
    CHECK(r.wall_thickness == s.wall_thickness);
    CHECK(r.surface_point_density == s.surface_point_density);
    CHECK(r.rng_seed == s.rng_seed);
    CHECK(r.noise_density == s.noise_density);
    CHECK(r.cell_size == s.cell_size);
    CHECK(r.room_size == s.room_size);
    CHECK(r.door_width == s.door_width);
    CHECK(r.corridor_width == s.corridor_width);
    CHECK(r.ring_barrier == s.ring_barrier);
    CHECK(r.voxel_size == s.voxel_size);
    CHECK(r.clearance == s.clearance);
  }
}

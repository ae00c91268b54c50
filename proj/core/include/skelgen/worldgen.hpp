#pragma once

#include <skelgen/map.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace skelgen {

enum class Archetype { Maze, Rooms, RingCorridor, MultiFloor };

[[nodiscard]] std::string archetype_name(Archetype a);
/// Accepts maze, rooms, ring (or ring-corridor), multifloor; throws InputError otherwise.
[[nodiscard]] Archetype parse_archetype(const std::string& name);

struct WorldSpec {
  Archetype archetype = Archetype::Maze;
  Vec3 extents = Vec3(60.0, 60.0, 2.5);  ///< meters
  double wall_thickness = 0.3;
  double surface_point_density = 100.0;  ///< points per m² of solid surface
  std::uint64_t rng_seed = 1;
  double noise_density = 0.0;            ///< outlier points per m³

  double cell_size = 2.5;        ///< maze cell pitch
  double room_size = 5.0;        ///< rooms archetype pitch
  double door_width = 2.0;
  double corridor_width = 3.0;   ///< ring corridor width
  bool ring_barrier = false;     ///< blocks the ring with a full-height wall
  double voxel_size = 0.25;      ///< grid rendering resolution
  double clearance = 0.3;        ///< clearance of both returned maps

  /// Throws InputError on non-positive extents, densities or sizes.
  void validate() const;
};

/// Matched renderings of one synthetic world.
struct World {
  WorldSpec spec;
  std::vector<Aabb> solids;  ///< solid boxes, clipped to the bounds
  Aabb bounds;
  Vec3 seed;                 ///< lattice point nearest the bounds center that is free in both maps
  PointCloudMap cloud;
  OccupancyGridMap grid;
};

/// Deterministic for a fixed spec. Faces of every solid are sampled on a
/// lattice of pitch 1/sqrt(density); a voxel is occupied when its center lies
/// inside a solid or it contains a noise point.
[[nodiscard]] World generate_world(const WorldSpec& spec);

/// Solid boxes of a spec without sampling. Mazes use a recursive backtracker.
[[nodiscard]] std::vector<Aabb> world_solids(const WorldSpec& spec);

/// Poisson(density·volume) uniform outliers inside the bounds; draws within
/// 2·clearance of `keep_clear` are redrawn.
[[nodiscard]] PointCloudMap add_noise(const PointCloudMap& map, double density,
                                      std::uint64_t rng_seed, const Vec3& keep_clear);

/// Free lattice point nearest `near` (pitch = clearance), searched over
/// growing shells. Throws InputError when the map has no free lattice point.
[[nodiscard]] Vec3 find_free_position(const CollisionOracle& map, const Vec3& near);

}  // namespace skelgen

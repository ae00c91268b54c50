#include <skelgen/worldgen.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace skelgen {

namespace {

Aabb box(double x0, double y0, double z0, double x1, double y1, double z1) {
  Aabb b;
  b.min = Vec3(x0, y0, z0);
  b.max = Vec3(x1, y1, z1);
  return b;
}

Aabb clip(const Aabb& b, const Aabb& bounds) {
  Aabb out;
  out.min = b.min.cwiseMax(bounds.min);
  out.max = b.max.cwiseMin(bounds.max);
  return out;
}

int cells_along(double extent, double pitch) {
  return std::max(1, static_cast<int>(std::lround(extent / pitch)));
}

// Floor, ceiling and the four outer walls.
void add_shell(std::vector<Aabb>& out, const Vec3& e, double t) {
  const double h = 0.5 * t;
  out.push_back(box(0, 0, -h, e.x(), e.y(), h));
  out.push_back(box(0, 0, e.z() - h, e.x(), e.y(), e.z() + h));
  out.push_back(box(-h, 0, 0, h, e.y(), e.z()));
  out.push_back(box(e.x() - h, 0, 0, e.x() + h, e.y(), e.z()));
  out.push_back(box(0, -h, 0, e.x(), h, e.z()));
  out.push_back(box(0, e.y() - h, 0, e.x(), e.y() + h, e.z()));
}

// Wall along a grid line; `along_x` walls run in x at y = pos.
void add_wall(std::vector<Aabb>& out, bool along_x, double pos, double from, double to,
              double t, double height) {
  const double h = 0.5 * t;
  if (along_x)
    out.push_back(box(from, pos - h, 0, to, pos + h, height));
  else
    out.push_back(box(pos - h, from, 0, pos + h, to, height));
}

void maze_solids(const WorldSpec& s, std::vector<Aabb>& out) {
  const Vec3& e = s.extents;
  const double t = s.wall_thickness;
  const int nx = cells_along(e.x(), s.cell_size);
  const int ny = cells_along(e.y(), s.cell_size);
  const double px = e.x() / nx;
  const double py = e.y() / ny;

  // open_east[i][j]: passage between (i,j) and (i+1,j); open_north likewise in y.
  std::vector<char> open_east(static_cast<std::size_t>(nx * ny), 0);
  std::vector<char> open_north(static_cast<std::size_t>(nx * ny), 0);
  std::vector<char> visited(static_cast<std::size_t>(nx * ny), 0);
  auto at = [nx](int i, int j) { return static_cast<std::size_t>(j * nx + i); };

  std::mt19937_64 rng(s.rng_seed);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  visited[0] = 1;
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    std::pair<int, int> options[4];
    int count = 0;
    if (i + 1 < nx && !visited[at(i + 1, j)]) options[count++] = {i + 1, j};
    if (i > 0 && !visited[at(i - 1, j)]) options[count++] = {i - 1, j};
    if (j + 1 < ny && !visited[at(i, j + 1)]) options[count++] = {i, j + 1};
    if (j > 0 && !visited[at(i, j - 1)]) options[count++] = {i, j - 1};
    if (count == 0) {
      stack.pop_back();
      continue;
    }
    const auto [ni, nj] = options[rng() % static_cast<unsigned>(count)];
    if (ni != i)
      open_east[at(std::min(i, ni), j)] = 1;
    else
      open_north[at(i, std::min(j, nj))] = 1;
    visited[at(ni, nj)] = 1;
    stack.emplace_back(ni, nj);
  }

  const double h = 0.5 * t;
  for (int i = 1; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (!open_east[at(i - 1, j)]) add_wall(out, false, i * px, j * py - h, (j + 1) * py + h, t, e.z());
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (!open_north[at(i, j - 1)]) add_wall(out, true, j * py, i * px - h, (i + 1) * px + h, t, e.z());
}

void rooms_solids(const WorldSpec& s, std::vector<Aabb>& out) {
  const Vec3& e = s.extents;
  const double t = s.wall_thickness;
  const int nx = cells_along(e.x(), s.room_size);
  const int ny = cells_along(e.y(), s.room_size);
  const double px = e.x() / nx;
  const double py = e.y() / ny;
  const double h = 0.5 * t;
  auto wall_with_door = [&](bool along_x, double pos, double from, double to) {
    const double mid = 0.5 * (from + to);
    const double half = 0.5 * std::min(s.door_width, to - from - 2 * t);
    add_wall(out, along_x, pos, from - h, mid - half, t, e.z());
    add_wall(out, along_x, pos, mid + half, to + h, t, e.z());
  };
  for (int i = 1; i < nx; ++i)
    for (int j = 0; j < ny; ++j) wall_with_door(false, i * px, j * py, (j + 1) * py);
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) wall_with_door(true, j * py, i * px, (i + 1) * px);
}

void ring_solids(const WorldSpec& s, std::vector<Aabb>& out) {
  const Vec3& e = s.extents;
  const double w = s.corridor_width;
  if (e.x() <= 2 * w + s.wall_thickness || e.y() <= 2 * w + s.wall_thickness)
    throw InputError("ring corridor does not fit the extents");
  out.push_back(box(w, w, 0, e.x() - w, e.y() - w, e.z()));
  if (s.ring_barrier) add_wall(out, false, 0.5 * e.x(), 0, w, s.wall_thickness, e.z());
}

void multifloor_solids(const WorldSpec& s, std::vector<Aabb>& out) {
  const Vec3& e = s.extents;
  const double t = s.wall_thickness;
  const double zs = 0.5 * e.z();
  const double hole = std::min({4.0, 0.25 * e.x(), 0.25 * e.y()});
  const double m = std::min(2.0, 0.1 * std::min(e.x(), e.y()));
  const double z0 = zs - 0.5 * t;
  const double z1 = zs + 0.5 * t;
  // Slab around a square opening [m, m + hole]².
  out.push_back(box(0, m + hole, z0, e.x(), e.y(), z1));
  out.push_back(box(0, 0, z0, e.x(), m, z1));
  out.push_back(box(0, m, z0, m, m + hole, z1));
  out.push_back(box(m + hole, m, z0, e.x(), m + hole, z1));

  constexpr double kPitch = 10.0;
  constexpr double kPillar = 0.3;
  for (double x = kPitch; x < e.x() - 1.0; x += kPitch)
    for (double y = kPitch; y < e.y() - 1.0; y += kPitch) {
      if (x + kPillar > m && x - kPillar < m + hole && y + kPillar > m && y - kPillar < m + hole)
        continue;
      out.push_back(box(x - kPillar, y - kPillar, 0, x + kPillar, y + kPillar, e.z()));
    }
}

void sample_faces(const Aabb& b, const Aabb& bounds, double pitch, std::vector<Vec3>& out) {
  const Vec3 ext = b.extent();
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    const int nu = std::max(1, static_cast<int>(std::ceil(ext[u] / pitch)));
    const int nv = std::max(1, static_cast<int>(std::ceil(ext[v] / pitch)));
    for (int side = 0; side < 2; ++side) {
      const double plane = side == 0 ? b.min[axis] : b.max[axis];
      if (plane == bounds.min[axis] || plane == bounds.max[axis]) continue;
      for (int a = 0; a <= nu; ++a)
        for (int c = 0; c <= nv; ++c) {
          Vec3 p;
          p[axis] = plane;
          p[u] = b.min[u] + ext[u] * a / nu;
          p[v] = b.min[v] + ext[v] * c / nv;
          out.push_back(p);
        }
    }
  }
}

std::vector<Vec3> noise_points(const Aabb& bounds, double density, std::uint64_t rng_seed,
                               const Vec3& keep_clear, double exclusion) {
  std::vector<Vec3> out;
  const double volume = bounds.extent().prod();
  if (density <= 0.0 || volume <= 0.0) return out;
  std::mt19937_64 rng(rng_seed);
  std::poisson_distribution<long long> count(density * volume);
  const long long n = count(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.reserve(static_cast<std::size_t>(n));
  while (static_cast<long long>(out.size()) < n) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = bounds.min[a] + unit(rng) * bounds.extent()[a];
    if ((p - keep_clear).norm() <= exclusion) continue;
    out.push_back(p);
  }
  return out;
}

template <typename FreeFn>
Vec3 nearest_free(const Aabb& b, double step, const Vec3& near, FreeFn&& is_free) {
  const Vec3 reach = (b.max - near).cwiseMax(near - b.min);
  const int max_shell = static_cast<int>(std::ceil(reach.maxCoeff() / step)) + 1;

  std::optional<Vec3> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= max_shell; ++r) {
    // Every point of shell r is at least r·step away; nothing closer remains.
    if (best && r * step > best_d) break;
    for (int k = -r; k <= r; ++k)
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
          if (std::max({std::abs(i), std::abs(j), std::abs(k)}) != r) continue;
          const Vec3 q = near + step * Vec3(i, j, k);
          const double d = (q - near).norm();
          if (d >= best_d || !b.contains(q) || !is_free(q)) continue;
          best = q;
          best_d = d;
        }
  }
  if (!best) throw InputError("no free position found in the map");
  return *best;
}

}  // namespace

std::string archetype_name(Archetype a) {
  switch (a) {
    case Archetype::Maze: return "maze";
    case Archetype::Rooms: return "rooms";
    case Archetype::RingCorridor: return "ring";
    case Archetype::MultiFloor: return "multifloor";
  }
  return "maze";
}

Archetype parse_archetype(const std::string& name) {
  if (name == "maze") return Archetype::Maze;
  if (name == "rooms") return Archetype::Rooms;
  if (name == "ring" || name == "ring-corridor") return Archetype::RingCorridor;
  if (name == "multifloor") return Archetype::MultiFloor;
  throw InputError("unknown world archetype: " + name);
}

void WorldSpec::validate() const {
  if (!(extents.array() > 0.0).all() || !extents.allFinite())
    throw InputError("world extents must be positive");
  if (!(surface_point_density > 0.0)) throw InputError("surface_point_density must be positive");
  if (!(noise_density >= 0.0)) throw InputError("noise_density must be non-negative");
  if (!(wall_thickness > 0.0)) throw InputError("wall_thickness must be positive");
  if (!(cell_size > wall_thickness) || !(room_size > wall_thickness))
    throw InputError("cell and room sizes must exceed the wall thickness");
  if (!(door_width > 0.0) || !(corridor_width > 0.0))
    throw InputError("door and corridor widths must be positive");
  if (!(voxel_size > 0.0) || !(clearance > 0.0))
    throw InputError("voxel_size and clearance must be positive");
}

std::vector<Aabb> world_solids(const WorldSpec& spec) {
  spec.validate();
  std::vector<Aabb> raw;
  add_shell(raw, spec.extents, spec.wall_thickness);
  switch (spec.archetype) {
    case Archetype::Maze: maze_solids(spec, raw); break;
    case Archetype::Rooms: rooms_solids(spec, raw); break;
    case Archetype::RingCorridor: ring_solids(spec, raw); break;
    case Archetype::MultiFloor: multifloor_solids(spec, raw); break;
  }
  const Aabb bounds = box(0, 0, 0, spec.extents.x(), spec.extents.y(), spec.extents.z());
  std::vector<Aabb> out;
  for (const auto& b : raw) {
    const Aabb c = clip(b, bounds);
    if ((c.extent().array() > 0.0).all()) out.push_back(c);
  }
  return out;
}

World generate_world(const WorldSpec& spec) {
  const std::vector<Aabb> solids = world_solids(spec);
  const Aabb bounds = box(0, 0, 0, spec.extents.x(), spec.extents.y(), spec.extents.z());

  const double pitch = 1.0 / std::sqrt(spec.surface_point_density);
  std::vector<Vec3> points;
  for (const auto& b : solids) sample_faces(b, bounds, pitch, points);
  const std::size_t surface_count = points.size();

  const double v = spec.voxel_size;
  const Eigen::Vector3i dims = (spec.extents / v).array().ceil().cast<int>().max(1);
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(dims.prod()), 0);
  auto index = [&](const Eigen::Vector3i& c) {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(c.y()) + static_cast<std::size_t>(dims.y()) * static_cast<std::size_t>(c.z()));
  };
  for (const auto& b : solids) {
    Eigen::Vector3i lo;
    Eigen::Vector3i hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::ceil(b.min[a] / v - 0.5)));
      hi[a] = std::min(dims[a] - 1, static_cast<int>(std::floor(b.max[a] / v - 0.5)));
    }
    for (int k = lo.z(); k <= hi.z(); ++k)
      for (int j = lo.y(); j <= hi.y(); ++j)
        for (int i = lo.x(); i <= hi.x(); ++i) occ[index({i, j, k})] = 1;
  }

  // The cloud only samples surfaces, so the seed must also be free in the grid.
  Vec3 seed;
  {
    const PointCloudMap clean_cloud(points, bounds, spec.clearance);
    const OccupancyGridMap clean_grid(bounds.min, v, dims, occ, spec.clearance);
    seed = nearest_free(bounds, spec.clearance, bounds.center(), [&](const Vec3& q) {
      return clean_cloud.is_free(q) && clean_grid.is_free(q);
    });
  }
  const double exclusion = 2.0 * spec.clearance + std::sqrt(3.0) * v;
  const auto noise = noise_points(bounds, spec.noise_density, spec.rng_seed ^ 0x9e3779b97f4a7c15ULL,
                                  seed, exclusion);
  points.insert(points.end(), noise.begin(), noise.end());
  for (std::size_t i = surface_count; i < points.size(); ++i) {
    const Eigen::Vector3i c = ((points[i] - bounds.min) / v).array().floor().cast<int>().min(dims.array() - 1).max(0);
    occ[index(c)] = 1;
  }

  return World{spec,
               solids,
               bounds,
               seed,
               PointCloudMap(std::move(points), bounds, spec.clearance),
               OccupancyGridMap(bounds.min, v, dims, std::move(occ), spec.clearance)};
}

PointCloudMap add_noise(const PointCloudMap& map, double density, std::uint64_t rng_seed,
                        const Vec3& keep_clear) {
  if (!(density >= 0.0)) throw InputError("noise density must be non-negative");
  std::vector<Vec3> points = map.points();
  const auto noise = noise_points(map.bounds(), density, rng_seed, keep_clear, 2.0 * map.clearance());
  points.insert(points.end(), noise.begin(), noise.end());
  return PointCloudMap(std::move(points), map.bounds(), map.clearance());
}

Vec3 find_free_position(const CollisionOracle& map, const Vec3& near) {
  return nearest_free(map.bounds(), map.clearance(), near, [&](const Vec3& q) { return map.is_free(q); });
}

}  // namespace skelgen

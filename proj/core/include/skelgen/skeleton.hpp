#pragma once

#include <skelgen/geometry.hpp>
#include <skelgen/graph.hpp>
#include <skelgen/map.hpp>

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace skelgen {

/// Tunables of the generator. None of the thresholds has a canonical value;
/// the defaults were picked for indoor maps at 0.3 m robot radius.
struct GenerationParams {
  int ray_count = 256;
  double max_ray_length = 2.0;           ///< truncation distance of sampling rays (m)
  double frontier_clear_distance = 0.5;  ///< free run required in front of a frontier (m)
  double node_size_epsilon = 0.5;        ///< enclosed nodes at or below this size are dropped (m)
  double split_angle_threshold = 75.0;   ///< max facet-normal spread inside one frontier (deg)
  double blind_distance_ratio = 1.5;     ///< max/min vertex range marking a blind facet
  double clearance = 0.3;                ///< robot radius (m)
  bool form_cycles = true;
  /// A closure is kept only when the existing graph route between the two
  /// nodes exceeds this multiple of the route through the new gate (floored
  /// at 2·max_ray_length) and the loop it closes cannot be shrunk through
  /// free space; 0 keeps all.
  double cycle_min_detour = 2.0;
  std::size_t max_expansions = 100000;

  /// Throws InputError on non-positive values or an out-of-range split angle.
  void validate() const;
};

enum class SampleKind { Black, White };

/// One ray endpoint of a node expansion.
struct VertexSample {
  Vec3 position;
  SampleKind kind = SampleKind::White;
  std::optional<NodeId> detected_polyhedron;  ///< owner of the boundary the ray hit first
  Vec3 projected_position;                    ///< on the unit sphere around the initial center
  std::size_t source_direction = 0;
};

struct SampleSet {
  std::vector<VertexSample> black;
  std::vector<VertexSample> white;
};

struct Frontier {
  std::vector<std::uint32_t> facets;  ///< facet indices on the parent polyhedron
  Vec3 normal = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  std::optional<Vec3> initial_position;
  NodeId parent_node = 0;
  bool blind = false;
};

struct Node {
  NodeId id = 0;
  VertexId vertex = 0;
  Vec3 center;          ///< rectified
  Vec3 initial_center;
  Polyhedron polyhedron;
  std::vector<Frontier> frontiers;
  double size = 0.0;    ///< mean distance of black samples to the initial center
  std::optional<NodeId> parent;
  std::vector<VertexSample> black_samples;
};

struct Gate {
  std::size_t id = 0;
  VertexId vertex = 0;
  Vec3 position;
  std::array<NodeId, 2> linked_nodes{};
  bool closes_cycle = false;
};

struct GenerationStats {
  std::size_t frontiers_popped = 0;
  std::size_t frontiers_invalid = 0;
  std::size_t expansions = 0;
  std::size_t rejected_small = 0;
  std::size_t rejected_degenerate = 0;
  std::size_t rejected_connection = 0;
  std::size_t cycles_formed = 0;
  std::size_t cycles_revoked = 0;
  std::size_t cycles_redundant = 0;  ///< closures dropped by the detour test
  bool hit_expansion_cap = false;
  double seconds = 0.0;
};

/// Output of generation: the graph plus the node/gate records behind it.
struct Skeleton {
  SkeletonGraph graph;
  std::vector<Node> nodes;
  std::vector<Gate> gates;
  GenerationStats stats;
};

struct FrontierVerdict {
  bool valid = false;
  double clear_distance = 0.0;  ///< distance to the nearer of map/registry hit, or the truncation
  std::optional<Vec3> initial_position;
};

/// One ray from the frontier center along its normal. Valid iff the nearer of
/// map and registry hits (or the truncation) lies beyond the clear distance;
/// the initial position is the midpoint of that ray segment, which must be
/// free and outside every polyhedron except the frontier's own.
[[nodiscard]] FrontierVerdict verify_frontier(const Frontier& f, const CollisionOracle& map,
                                              const PolyhedronRegistry& registry,
                                              const GenerationParams& params);

/// One sample per direction. A ray that meets nothing within max_ray_length
/// yields a white sample at the truncated end. A ray whose first hit is an
/// obstacle yields a black sample at the last free march position; a first hit
/// on a registered boundary yields a black sample on that boundary carrying
/// its owner.
[[nodiscard]] SampleSet generate_vertices(const Vec3& initial_center, const DirectionSet& dirs,
                                          const CollisionOracle& map,
                                          const PolyhedronRegistry& registry,
                                          const GenerationParams& params);

/// Recomputes normal (normalized mean of member facet normals) and center
/// (mean of facet centers projected along the normal onto the nearest member
/// facet; the closest facet center when no member facet is crossed).
void finalize_frontier(const TriangleMesh& mesh, Frontier& f);

/// Region growing over facet adjacency. A facet joins a part only when its
/// normal is within `threshold_deg` of the part's running mean normal and of
/// every facet already in the part.
[[nodiscard]] std::vector<Frontier> split_frontier(const TriangleMesh& mesh, const Frontier& f,
                                                   double threshold_deg);

/// Black samples (indices into `black`) that have a white sample among their
/// direction-hull neighbors, partitioned into connected sets over the
/// polyhedron's edges.
[[nodiscard]] std::vector<std::vector<std::uint32_t>> group_black_samples(
    std::span<const VertexSample> black, std::span<const VertexSample> white,
    const DirectionSet& dirs, const TriangleMesh& mesh);

/// Facets whose three vertices all belong to `group` (ascending facet order).
[[nodiscard]] std::vector<std::uint32_t> group_facets(const TriangleMesh& mesh,
                                                      std::span<const std::uint32_t> group);

/// Facets (outside `excluded`) whose max/min vertex distance to `center`
/// exceeds the ratio, clustered over facet adjacency, then split by normal
/// angle like ordinary frontiers.
[[nodiscard]] std::vector<Frontier> detect_blind_frontiers(const Polyhedron& poly,
                                                           const Vec3& center,
                                                           std::span<const std::uint32_t> excluded,
                                                           double ratio,
                                                           double split_threshold_deg);

struct PolyAndFrontiers {
  TriangleMesh unit_hull;
  Polyhedron polyhedron;
  std::vector<Frontier> frontiers;  ///< sorted by facet count, descending
};

/// Hull of the projected black samples, its facets carried onto the black
/// positions, then grouped, split and blind frontiers. Throws GeometryError
/// with fewer than four black samples or when the hull fails.
[[nodiscard]] PolyAndFrontiers build_poly_and_frontiers(NodeId node, const Vec3& initial_center,
                                                        std::span<const VertexSample> black,
                                                        std::span<const VertexSample> white,
                                                        const DirectionSet& dirs,
                                                        const GenerationParams& params);

struct CycleClosure {
  NodeId owner = 0;
  std::size_t frontier_index = 0;
  std::size_t sample_count = 0;
  Vec3 gate_position;
};

struct CycleFormation {
  std::vector<CycleClosure> closures;
  std::size_t revoked = 0;
};

/// For every previously built polyhedron hit by `black` (other than
/// `exclude`), picks the owner's frontier holding the most of those samples
/// and proposes a gate at its center. Proposals whose gate or either
/// connection fails the collision check are revoked. Ties on the sample count
/// go to the lower frontier index.
[[nodiscard]] CycleFormation form_cycles(const Vec3& node_center,
                                         std::span<const VertexSample> black,
                                         std::span<const Node> nodes, const CollisionOracle& map,
                                         std::optional<NodeId> exclude);

/// Frontier-driven breadth-first skeleton growth. Single-threaded: the FIFO
/// order of pending frontiers defines the result.
class SkeletonBuilder {
 public:
  SkeletonBuilder(const CollisionOracle& map, GenerationParams params);

  /// Expands the first node at `seed` with no parent gate. Throws InputError
  /// for an occupied or out-of-bounds seed and GeometryError when the seed
  /// expansion cannot build a polyhedron.
  NodeId initialize(const Vec3& seed);

  /// Pops and processes one pending frontier; false once the queue is empty.
  bool step();

  /// Node expansion from a verified frontier of node `parent`. Returns the new
  /// node id, or nothing when the expansion is rejected.
  std::optional<NodeId> expand_node(NodeId parent, std::size_t frontier_index);

  void run();

  [[nodiscard]] const Skeleton& skeleton() const { return skeleton_; }
  [[nodiscard]] Skeleton release() { return std::move(skeleton_); }
  [[nodiscard]] std::size_t pending() const { return pending_.size(); }
  [[nodiscard]] const DirectionSet& directions() const { return dirs_; }
  [[nodiscard]] const GenerationParams& params() const { return params_; }

 private:
  struct PendingFrontier {
    NodeId node;
    std::size_t index;
  };

  std::optional<NodeId> expand_at(const Vec3& initial_center, std::optional<NodeId> parent,
                                  std::optional<std::size_t> frontier_index);

  const CollisionOracle& map_;
  GenerationParams params_;
  DirectionSet dirs_;
  Skeleton skeleton_;
  std::deque<PendingFrontier> pending_;
};

/// Runs the whole generation loop from `seed`.
[[nodiscard]] Skeleton generate_skeleton(const CollisionOracle& map, const Vec3& seed,
                                         const GenerationParams& params);

/// Writes every node polyhedron as an OBJ group, frontiers as separate groups.
void save_polyhedra_obj(const std::filesystem::path& path, const Skeleton& skeleton);

}  // namespace skelgen

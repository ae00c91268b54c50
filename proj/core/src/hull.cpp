#include <skelgen/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace skelgen {

namespace {

// Raised internally when the input spans fewer than three dimensions.
struct DegenerateInput {};

constexpr double kRelativeEpsilon = 1e-10;
constexpr double kJitter = 1e-8;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class QuickHull {
 public:
  QuickHull(std::span<const Vec3> input) {
    Aabb box;
    for (const auto& p : input) box.extend(p);
    const Vec3 shift = box.center();
    pts_.reserve(input.size());
    for (const auto& p : input) pts_.push_back(p - shift);
    const double scale = std::max(box.extent().maxCoeff(), 1e-300);
    eps_ = kRelativeEpsilon * scale;
  }

  std::vector<Facet> run() {
    build_initial_simplex();
    std::vector<std::uint32_t> stack;
    for (std::uint32_t f = 0; f < faces_.size(); ++f)
      if (!faces_[f].outside.empty()) stack.push_back(f);

    std::vector<std::uint32_t> visible;
    std::vector<std::uint32_t> frontier;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
    std::vector<std::uint32_t> orphans;
    std::uint32_t visit_stamp = 0;

    while (!stack.empty()) {
      const std::uint32_t start = stack.back();
      stack.pop_back();
      if (!faces_[start].alive || faces_[start].outside.empty()) continue;

      // Farthest outside point of this face.
      std::uint32_t eye = faces_[start].outside.front();
      double best = distance(faces_[start], eye);
      for (auto p : faces_[start].outside) {
        const double d = distance(faces_[start], p);
        if (d > best) {
          best = d;
          eye = p;
        }
      }

      // Visible region by flood fill over edge-adjacent faces.
      ++visit_stamp;
      visible.clear();
      frontier.assign(1, start);
      faces_[start].stamp = visit_stamp;
      while (!frontier.empty()) {
        const std::uint32_t f = frontier.back();
        frontier.pop_back();
        visible.push_back(f);
        for (int e = 0; e < 3; ++e) {
          const auto& v = faces_[f].v;
          const std::uint32_t g = twin_face(v[e], v[(e + 1) % 3]);
          if (faces_[g].stamp == visit_stamp) continue;
          faces_[g].stamp = visit_stamp;
          if (distance(faces_[g], eye) > eps_) frontier.push_back(g);
        }
      }
      // Faces reached but not visible carry a stale stamp; only `visible` counts.
      ++visit_stamp;
      for (auto f : visible) faces_[f].stamp = visit_stamp;

      horizon.clear();
      orphans.clear();
      for (auto f : visible) {
        const auto& v = faces_[f].v;
        for (int e = 0; e < 3; ++e) {
          const std::uint32_t a = v[e];
          const std::uint32_t b = v[(e + 1) % 3];
          if (faces_[twin_face(a, b)].stamp != visit_stamp) horizon.emplace_back(a, b);
        }
      }
      for (auto f : visible) {
        auto& face = faces_[f];
        face.alive = false;
        for (int e = 0; e < 3; ++e) half_edges_.erase(edge_key(face.v[e], face.v[(e + 1) % 3]));
        for (auto p : face.outside)
          if (p != eye) orphans.push_back(p);
        face.outside.clear();
        face.outside.shrink_to_fit();
      }

      const auto first_new = static_cast<std::uint32_t>(faces_.size());
      for (const auto& [a, b] : horizon) add_face(a, b, eye);
      const auto last_new = static_cast<std::uint32_t>(faces_.size());

      for (auto p : orphans) {
        std::uint32_t owner = last_new;
        double owner_dist = eps_;
        for (std::uint32_t f = first_new; f < last_new; ++f) {
          const double d = distance(faces_[f], p);
          if (d > owner_dist) {
            owner_dist = d;
            owner = f;
          }
        }
        if (owner != last_new) faces_[owner].outside.push_back(p);
      }
      for (std::uint32_t f = first_new; f < last_new; ++f)
        if (!faces_[f].outside.empty()) stack.push_back(f);
    }

    std::vector<Facet> out;
    for (const auto& f : faces_)
      if (f.alive) out.push_back(f.v);
    return out;
  }

  [[nodiscard]] Vec3 plane_normal(const Facet& t) const {
    for (const auto& f : faces_)
      if (f.alive && f.v == t) return f.n;
    return Vec3::Zero();
  }

 private:
  struct Face {
    Facet v;
    Vec3 n;
    double d;
    std::vector<std::uint32_t> outside;
    bool alive = true;
    std::uint32_t stamp = 0;
  };

  [[nodiscard]] double distance(const Face& f, std::uint32_t p) const {
    return f.n.dot(pts_[p]) - f.d;
  }

  std::uint32_t twin_face(std::uint32_t a, std::uint32_t b) const {
    return half_edges_.at(edge_key(b, a));
  }

  std::uint32_t add_face(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Face f;
    f.v = {a, b, c};
    Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    const double len = n.norm();
    f.n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    f.d = f.n.dot(pts_[a]);
    const auto id = static_cast<std::uint32_t>(faces_.size());
    faces_.push_back(std::move(f));
    half_edges_[edge_key(a, b)] = id;
    half_edges_[edge_key(b, c)] = id;
    half_edges_[edge_key(c, a)] = id;
    return id;
  }

  void build_initial_simplex() {
    const auto n = static_cast<std::uint32_t>(pts_.size());
    // Extreme points per axis, then the most distant pair among them.
    std::array<std::uint32_t, 6> ext{};
    for (std::uint32_t i = 0; i < n; ++i)
      for (int a = 0; a < 3; ++a) {
        if (pts_[i][a] < pts_[ext[2 * a]][a]) ext[2 * a] = i;
        if (pts_[i][a] > pts_[ext[2 * a + 1]][a]) ext[2 * a + 1] = i;
      }
    std::uint32_t i0 = ext[0];
    std::uint32_t i1 = ext[1];
    double best = -1.0;
    for (auto a : ext)
      for (auto b : ext) {
        const double d = (pts_[a] - pts_[b]).squaredNorm();
        if (d > best) {
          best = d;
          i0 = a;
          i1 = b;
        }
      }
    if (std::sqrt(best) <= eps_) throw DegenerateInput{};

    const Vec3 axis = (pts_[i1] - pts_[i0]).normalized();
    std::uint32_t i2 = i0;
    best = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const Vec3 r = pts_[i] - pts_[i0];
      const double d = (r - r.dot(axis) * axis).norm();
      if (d > best) {
        best = d;
        i2 = i;
      }
    }
    if (best <= eps_) throw DegenerateInput{};

    const Vec3 pn = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    std::uint32_t i3 = i0;
    best = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const double d = std::abs(pn.dot(pts_[i] - pts_[i0]));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (best <= eps_) throw DegenerateInput{};

    // Orient so that the base triangle faces away from the apex.
    if (pn.dot(pts_[i3] - pts_[i0]) > 0.0) std::swap(i1, i2);
    add_face(i0, i1, i2);
    add_face(i0, i3, i1);
    add_face(i1, i3, i2);
    add_face(i2, i3, i0);

    for (std::uint32_t p = 0; p < n; ++p) {
      if (p == i0 || p == i1 || p == i2 || p == i3) continue;
      std::uint32_t owner = 4;
      double owner_dist = eps_;
      for (std::uint32_t f = 0; f < 4; ++f) {
        const double d = distance(faces_[f], p);
        if (d > owner_dist) {
          owner_dist = d;
          owner = f;
        }
      }
      if (owner != 4) faces_[owner].outside.push_back(p);
    }
  }

  std::vector<Vec3> pts_;
  double eps_ = 0.0;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, std::uint32_t> half_edges_;
};

TriangleMesh assemble(std::span<const Vec3> points, QuickHull& hull, const std::vector<Facet>& facets) {
  TriangleMesh mesh;
  mesh.vertices.assign(points.begin(), points.end());
  mesh.facets = facets;
  mesh.facet_normals.reserve(facets.size());
  for (const auto& t : facets) {
    Vec3 n = triangle_normal(points[t[0]], points[t[1]], points[t[2]]);
    if (n.isZero()) n = hull.plane_normal(t);
    mesh.facet_normals.push_back(n);
  }
  return mesh;
}

}  // namespace

TriangleMesh convex_hull_mesh(std::span<const Vec3> points) {
  if (points.size() < 4) throw GeometryError("convex hull needs at least 4 points");
  for (const auto& p : points)
    if (!p.allFinite()) throw GeometryError("convex hull input is not finite");
  try {
    QuickHull hull(points);
    const auto facets = hull.run();
    return assemble(points, hull, facets);
  } catch (const DegenerateInput&) {
  }

  std::vector<Vec3> jittered(points.begin(), points.end());
  for (std::size_t i = 0; i < jittered.size(); ++i) {
    Vec3 offset;
    for (int a = 0; a < 3; ++a) {
      const std::uint64_t h = splitmix64(i * 3 + static_cast<std::uint64_t>(a));
      offset[a] = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    jittered[i] += kJitter * offset;
  }
  try {
    QuickHull hull(jittered);
    const auto facets = hull.run();
    return assemble(points, hull, facets);
  } catch (const DegenerateInput&) {
    throw GeometryError("convex hull input is degenerate (coplanar or collinear)");
  }
}

}  // namespace skelgen

#include <skelgen/map.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace skelgen {

namespace {

using json = nlohmann::json;

std::string at_line(const std::filesystem::path& path, std::size_t line, std::string_view what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  return os.str();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view token, double& out) {
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

std::vector<Vec3> read_ply(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  std::size_t line_no = 1;  // "ply" already consumed
  bool ascii = false;
  bool in_vertex = false;
  bool seen_vertex = false;
  std::size_t vertex_count = 0;
  int prop_index = 0;
  int ix = -1;
  int iy = -1;
  int iz = -1;
  for (;;) {
    if (!std::getline(in, line)) throw InputError(at_line(path, line_no, "missing end_header"));
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii")
        throw InputError(at_line(path, line_no, "only ASCII PLY is supported"));
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw InputError(at_line(path, line_no, "malformed element"));
      in_vertex = tok[1] == "vertex";
      if (in_vertex) {
        const auto count = std::string(tok[2]);
        try {
          vertex_count = std::stoul(count);
        } catch (const std::exception&) {
          throw InputError(at_line(path, line_no, "malformed vertex count"));
        }
        seen_vertex = true;
        prop_index = 0;
      }
    } else if (tok[0] == "property" && in_vertex) {
      if (tok.size() < 3) throw InputError(at_line(path, line_no, "malformed property"));
      const auto name = tok.back();
      if (name == "x") ix = prop_index;
      if (name == "y") iy = prop_index;
      if (name == "z") iz = prop_index;
      ++prop_index;
    }
  }
  if (!ascii) throw InputError(at_line(path, line_no, "missing ascii format line"));
  if (!seen_vertex || ix < 0 || iy < 0 || iz < 0)
    throw InputError(at_line(path, line_no, "PLY has no vertex x/y/z properties"));

  std::vector<Vec3> points;
  points.reserve(vertex_count);
  while (points.size() < vertex_count) {
    if (!std::getline(in, line))
      throw InputError(at_line(path, line_no, "unexpected end of vertex data"));
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (static_cast<int>(tok.size()) < prop_index)
      throw InputError(at_line(path, line_no, "malformed vertex record"));
    Vec3 p;
    if (!parse_double(tok[ix], p.x()) || !parse_double(tok[iy], p.y()) ||
        !parse_double(tok[iz], p.z()))
      throw InputError(at_line(path, line_no, "malformed vertex record"));
    points.push_back(p);
  }
  return points;
}

std::vector<Vec3> read_xyz(std::istream& in, const std::filesystem::path& path,
                           std::string first_line) {
  std::vector<Vec3> points;
  std::string line = std::move(first_line);
  std::size_t line_no = 1;
  bool have_line = true;
  while (have_line) {
    const auto tok = split_ws(line);
    if (!tok.empty() && tok[0].front() != '#') {
      Vec3 p;
      if (tok.size() < 3 || !parse_double(tok[0], p.x()) || !parse_double(tok[1], p.y()) ||
          !parse_double(tok[2], p.z()))
        throw InputError(at_line(path, line_no, "malformed record"));
      points.push_back(p);
    }
    have_line = static_cast<bool>(std::getline(in, line));
    ++line_no;
  }
  return points;
}

}  // namespace

PointCloudMap load_point_cloud(const std::filesystem::path& path, double clearance) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read map file: " + path.string());
  std::string first;
  std::vector<Vec3> points;
  if (std::getline(in, first)) {
    const auto tok = split_ws(first);
    if (!tok.empty() && tok[0] == "ply")
      points = read_ply(in, path);
    else
      points = read_xyz(in, path, first);
  }
  if (points.empty()) throw InputError("empty cloud: " + path.string());
  return PointCloudMap(std::move(points), clearance);
}

void save_point_cloud_ply(const std::filesystem::path& path, std::span<const Vec3> points) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  out.precision(9);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

void save_point_cloud_xyz(const std::filesystem::path& path, std::span<const Vec3> points) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out.precision(9);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

// Grid JSON layout:
//   {"format": "skelgen-grid", "version": 1, "origin": [x,y,z], "voxel_size": v,
//    "dims": [nx,ny,nz], "rle": [free_run, occupied_run, free_run, ...]}
// Runs alternate starting with free voxels, x-fastest order; they sum to nx*ny*nz.
OccupancyGridMap load_grid_map(const std::filesystem::path& path, double clearance) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read map file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    if (doc.value("format", std::string{}) != "skelgen-grid")
      throw InputError(path.string() + ": not a skelgen-grid document");
    const auto origin = doc.at("origin").get<std::vector<double>>();
    const auto dims = doc.at("dims").get<std::vector<int>>();
    const double voxel = doc.at("voxel_size").get<double>();
    const auto runs = doc.at("rle").get<std::vector<std::uint64_t>>();
    if (origin.size() != 3 || dims.size() != 3)
      throw InputError(path.string() + ": origin and dims need 3 entries");
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
      throw InputError(path.string() + ": grid dimensions must be >= 1");
    const std::size_t total = static_cast<std::size_t>(dims[0]) *
                              static_cast<std::size_t>(dims[1]) *
                              static_cast<std::size_t>(dims[2]);
    std::vector<std::uint8_t> occ;
    occ.reserve(total);
    std::uint8_t value = 0;
    for (auto run : runs) {
      if (occ.size() + run > total) throw InputError(path.string() + ": run lengths overflow grid");
      occ.insert(occ.end(), run, value);
      value ^= 1;
    }
    if (occ.size() != total) throw InputError(path.string() + ": run lengths do not cover grid");
    return OccupancyGridMap(Vec3(origin[0], origin[1], origin[2]), voxel,
                            Eigen::Vector3i(dims[0], dims[1], dims[2]), std::move(occ), clearance);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": malformed grid JSON: " + e.what());
  }
}

void save_grid_map(const std::filesystem::path& path, const OccupancyGridMap& grid) {
  std::vector<std::uint64_t> runs;
  std::uint8_t value = 0;
  std::uint64_t run = 0;
  for (auto cell : grid.occupancy()) {
    const std::uint8_t v = cell ? 1 : 0;
    if (v != value) {
      runs.push_back(run);
      run = 0;
      value = v;
    }
    ++run;
  }
  runs.push_back(run);

  json doc;
  doc["format"] = "skelgen-grid";
  doc["version"] = 1;
  doc["origin"] = {grid.origin().x(), grid.origin().y(), grid.origin().z()};
  doc["voxel_size"] = grid.voxel_size();
  doc["dims"] = {grid.dims().x(), grid.dims().y(), grid.dims().z()};
  doc["rle"] = runs;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

OccupancyGridMap voxelize(const PointCloudMap& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw InputError("voxel_size must be positive");
  const Aabb& box = cloud.bounds();
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a)
    dims[a] = static_cast<int>(std::floor(box.extent()[a] / voxel_size)) + 1;
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(dims.x()) *
                                    static_cast<std::size_t>(dims.y()) *
                                    static_cast<std::size_t>(dims.z()),
                                0);
  for (const auto& p : cloud.points()) {
    Eigen::Vector3i v;
    for (int a = 0; a < 3; ++a)
      v[a] = std::clamp(static_cast<int>(std::floor((p[a] - box.min[a]) / voxel_size)), 0,
                        dims[a] - 1);
    occ[static_cast<std::size_t>(v.x()) +
        static_cast<std::size_t>(dims.x()) *
            (static_cast<std::size_t>(v.y()) +
             static_cast<std::size_t>(dims.y()) * static_cast<std::size_t>(v.z()))] = 1;
  }
  return OccupancyGridMap(box.min, voxel_size, dims, std::move(occ), cloud.clearance());
}

std::unique_ptr<CollisionOracle> load_map(const std::filesystem::path& path, double clearance) {
  if (!std::filesystem::exists(path)) throw InputError("map not found: " + path.string());
  if (path.extension() == ".json")
    return std::make_unique<OccupancyGridMap>(load_grid_map(path, clearance));
  return std::make_unique<PointCloudMap>(load_point_cloud(path, clearance));
}

}  // namespace skelgen

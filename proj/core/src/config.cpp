#include <skelgen/config.hpp>

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

namespace skelgen {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

json toml_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  auto fail = [&]() -> json {
    throw InputError("TOML line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
  };
  if (v.empty()) return fail();
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') return fail();
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') return fail();
    json arr = json::array();
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) arr.push_back(toml_value(item, line_no));
    return arr;
  }
  std::string cleaned;
  for (char c : v)
    if (c != '_') cleaned += c;
  std::size_t used = 0;
  try {
    if (cleaned.find_first_of(".eE") == std::string::npos && cleaned.find("inf") == std::string::npos) {
      const long long i = std::stoll(cleaned, &used);
      if (used == cleaned.size()) return i;
    }
    const double d = std::stod(cleaned, &used);
    if (used == cleaned.size()) return d;
  } catch (const std::exception&) {
  }
  return fail();
}

json parse_toml(const std::string& text) {
  json doc = json::object();
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty() || body.front() == '[') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw InputError("TOML line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw InputError("TOML line " + std::to_string(line_no) + ": empty key");
    doc[key] = toml_value(body.substr(eq + 1), line_no);
  }
  return doc;
}

std::string toml_scalar(const json& v) {
  if (v.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_scalar(v[i]);
    return out + "]";
  }
  if (v.is_number_float()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v.get<double>();
    std::string s = ss.str();
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  return v.dump();
}

std::string to_toml(const json& doc, const char* section) {
  std::string out = std::string("[") + section + "]\n";
  for (const auto& [k, v] : doc.items()) out += k + " = " + toml_scalar(v) + "\n";
  return out;
}

json parse(const std::string& text, ConfigFormat format) {
  if (format == ConfigFormat::Toml) return parse_toml(text);
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw InputError("config JSON must be an object");
    return doc;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config JSON: ") + e.what());
  }
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config key '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& doc, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : doc.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw InputError("unknown config key: " + k);
  }
}

json params_json(const GenerationParams& p) {
  return json{{"ray_count", p.ray_count},
              {"max_ray_length", p.max_ray_length},
              {"frontier_clear_distance", p.frontier_clear_distance},
              {"node_size_epsilon", p.node_size_epsilon},
              {"split_angle_threshold", p.split_angle_threshold},
              {"blind_distance_ratio", p.blind_distance_ratio},
              {"clearance", p.clearance},
              {"form_cycles", p.form_cycles},
              {"cycle_min_detour", p.cycle_min_detour},
              {"max_expansions", p.max_expansions}};
}

json world_json(const WorldSpec& s) {
  return json{{"archetype", archetype_name(s.archetype)},
              {"extents", {s.extents.x(), s.extents.y(), s.extents.z()}},
              {"wall_thickness", s.wall_thickness},
              {"surface_point_density", s.surface_point_density},
              {"rng_seed", s.rng_seed},
              {"noise_density", s.noise_density},
              {"cell_size", s.cell_size},
              {"room_size", s.room_size},
              {"door_width", s.door_width},
              {"corridor_width", s.corridor_width},
              {"ring_barrier", s.ring_barrier},
              {"voxel_size", s.voxel_size},
              {"clearance", s.clearance}};
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string(what) + " not found: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

}  // namespace

ConfigFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".toml" ? ConfigFormat::Toml : ConfigFormat::Json;
}

GenerationParams params_from_text(const std::string& text, ConfigFormat format,
                                  const GenerationParams& base) {
  const json doc = parse(text, format);
  reject_unknown(doc, {"ray_count", "max_ray_length", "frontier_clear_distance", "node_size_epsilon",
                       "split_angle_threshold", "blind_distance_ratio", "clearance", "form_cycles",
                       "cycle_min_detour", "max_expansions"});
  GenerationParams p = base;
  read(doc, "ray_count", p.ray_count);
  read(doc, "max_ray_length", p.max_ray_length);
  read(doc, "frontier_clear_distance", p.frontier_clear_distance);
  read(doc, "node_size_epsilon", p.node_size_epsilon);
  read(doc, "split_angle_threshold", p.split_angle_threshold);
  read(doc, "blind_distance_ratio", p.blind_distance_ratio);
  read(doc, "clearance", p.clearance);
  read(doc, "form_cycles", p.form_cycles);
  read(doc, "cycle_min_detour", p.cycle_min_detour);
  read(doc, "max_expansions", p.max_expansions);
  p.validate();
  return p;
}

std::string params_to_text(const GenerationParams& params, ConfigFormat format) {
  const json doc = params_json(params);
  return format == ConfigFormat::Toml ? to_toml(doc, "generation") : doc.dump(2) + "\n";
}

WorldSpec world_from_text(const std::string& text, ConfigFormat format, const WorldSpec& base) {
  const json doc = parse(text, format);
  reject_unknown(doc, {"archetype", "extents", "wall_thickness", "surface_point_density", "rng_seed",
                       "noise_density", "cell_size", "room_size", "door_width", "corridor_width",
                       "ring_barrier", "voxel_size", "clearance"});
  WorldSpec s = base;
  if (doc.contains("archetype")) {
    std::string name;
    read(doc, "archetype", name);
    s.archetype = parse_archetype(name);
  }
  if (doc.contains("extents")) {
    std::vector<double> e;
    read(doc, "extents", e);
    if (e.size() != 3) throw InputError("extents needs 3 entries");
    s.extents = Vec3(e[0], e[1], e[2]);
  }
  read(doc, "wall_thickness", s.wall_thickness);
  read(doc, "surface_point_density", s.surface_point_density);
  read(doc, "rng_seed", s.rng_seed);
  read(doc, "noise_density", s.noise_density);
  read(doc, "cell_size", s.cell_size);
  read(doc, "room_size", s.room_size);
  read(doc, "door_width", s.door_width);
  read(doc, "corridor_width", s.corridor_width);
  read(doc, "ring_barrier", s.ring_barrier);
  read(doc, "voxel_size", s.voxel_size);
  read(doc, "clearance", s.clearance);
  s.validate();
  return s;
}

std::string world_to_text(const WorldSpec& spec, ConfigFormat format) {
  const json doc = world_json(spec);
  return format == ConfigFormat::Toml ? to_toml(doc, "world") : doc.dump(2) + "\n";
}

GenerationParams load_params(const std::filesystem::path& path, const GenerationParams& base) {
  return params_from_text(read_file(path, "params file"), format_for(path), base);
}

void save_params(const std::filesystem::path& path, const GenerationParams& params) {
  write_file(path, params_to_text(params, format_for(path)));
}

WorldSpec load_world_spec(const std::filesystem::path& path, const WorldSpec& base) {
  return world_from_text(read_file(path, "world spec"), format_for(path), base);
}

void save_world_spec(const std::filesystem::path& path, const WorldSpec& spec) {
  write_file(path, world_to_text(spec, format_for(path)));
}

}  // namespace skelgen

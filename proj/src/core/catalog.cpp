#include "catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "physics.hpp"
#include "rng.hpp"

namespace craft {

namespace {

Interval read_interval(const nlohmann::json& slot, const char* key, const std::string& where,
                       std::optional<Interval> fallback) {
  if (!slot.contains(key)) {
    if (fallback) return *fallback;
    fail(ErrorKind::validation, where + ": missing interval '" + key + "'");
  }
  const auto& v = slot[key];
  Interval iv;
  if (v.is_number()) {
    iv = {v.get<double>(), v.get<double>()};
  } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    iv = {v[0].get<double>(), v[1].get<double>()};
  } else {
    fail(ErrorKind::validation, where + ": interval '" + key + "' must be [min, max]");
  }
  if (iv.min > iv.max) {
    fail(ErrorKind::validation, where + ": interval '" + key + "' has min > max");
  }
  return iv;
}

StaticSlot read_static_slot(const nlohmann::json& j, const std::string& where) {
  StaticSlot s;
  const auto kind = parse_static_kind(j.value("kind", ""));
  if (!kind) fail(ErrorKind::validation, where + ": unknown static kind");
  s.kind = *kind;
  s.name = j.value("name", std::string(name(s.kind)));
  const std::string at = where + " (" + s.name + ")";
  const Interval zero{0.0, 0.0};
  switch (s.kind) {
    case StaticKind::ground:
      s.y = read_interval(j, "y", at, std::nullopt);
      break;
    case StaticKind::left_wall:
    case StaticKind::right_wall:
      s.x = read_interval(j, "x", at, std::nullopt);
      break;
    case StaticKind::ramp:
    case StaticKind::platform:
    case StaticKind::button:
      s.x = read_interval(j, "x", at, std::nullopt);
      s.y = read_interval(j, "y", at, std::nullopt);
      s.angle = read_interval(j, "angle", at, zero);
      s.length = read_interval(j, "length", at, std::nullopt);
      s.thickness = read_interval(j, "thickness", at, Interval{0.2, 0.2});
      break;
    case StaticKind::basket:
      s.x = read_interval(j, "x", at, std::nullopt);
      s.y = read_interval(j, "y", at, std::nullopt);
      s.width = read_interval(j, "width", at, std::nullopt);
      s.height = read_interval(j, "height", at, std::nullopt);
      break;
  }
  return s;
}

DynamicSlot read_dynamic_slot(const nlohmann::json& j, const std::string& where) {
  DynamicSlot d;
  d.x = read_interval(j, "x", where, std::nullopt);
  d.y = read_interval(j, "y", where, std::nullopt);
  d.angle = read_interval(j, "angle", where, Interval{0.0, 0.0});
  const std::string mode = j.value("mode", "resting");
  if (mode == "intender") {
    d.mode = SlotMode::intender;
    d.speed = read_interval(j, "speed", where, Interval{1.0, 6.0});
    d.direction = read_interval(j, "direction", where, std::nullopt);
    if (d.speed.min <= 0.0) fail(ErrorKind::validation, where + ": intender speed must be > 0");
  } else if (mode != "resting") {
    fail(ErrorKind::validation, where + ": mode must be 'intender' or 'resting'");
  }
  return d;
}

double draw(Rng& rng, const Interval& iv) {
  return iv.min == iv.max ? iv.min : rng.uniform(iv.min, iv.max);
}

}  // namespace

const LayoutTemplate& Catalog::layout(int layout_id) const {
  for (const auto& l : layouts) {
    if (l.layout_id == layout_id) return l;
  }
  fail(ErrorKind::argument, "layout " + std::to_string(layout_id) + " is not in the catalog");
}

std::vector<int> Catalog::layout_ids() const {
  std::vector<int> ids;
  for (const auto& l : layouts) ids.push_back(l.layout_id);
  return ids;
}

Catalog parse_catalog(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::validation, "catalog must be a JSON object");
  Catalog c;
  if (!j.contains("catalog_version") || !j["catalog_version"].is_string()) {
    fail(ErrorKind::validation, "catalog: missing catalog_version");
  }
  c.catalog_version = j["catalog_version"].get<std::string>();
  if (!j.contains("layouts") || !j["layouts"].is_array() || j["layouts"].empty()) {
    fail(ErrorKind::validation, "catalog: no layouts");
  }
  std::set<int> seen;
  for (const auto& lj : j["layouts"]) {
    LayoutTemplate l;
    l.layout_id = lj.value("layout_id", 0);
    const std::string where = "layout " + std::to_string(l.layout_id);
    if (l.layout_id < 1 || !seen.insert(l.layout_id).second) {
      fail(ErrorKind::validation, where + ": layout_id must be positive and unique");
    }
    l.name = lj.value("name", "");
    int index = 0;
    std::set<StaticKind> boundary;
    for (const auto& sj : lj.at("statics")) {
      l.statics.push_back(read_static_slot(sj, where + " static slot " + std::to_string(index++)));
      const StaticKind k = l.statics.back().kind;
      if (k == StaticKind::ground || k == StaticKind::left_wall || k == StaticKind::right_wall) {
        if (!boundary.insert(k).second) {
          fail(ErrorKind::validation, where + ": duplicate " + std::string(name(k)));
        }
      }
    }
    if (boundary.size() != 3) {
      fail(ErrorKind::validation, where + ": ground, left_wall and right_wall are required");
    }
    const auto& dj = lj.at("dynamics");
    const Interval count = read_interval(dj, "count", where + " dynamics", std::nullopt);
    l.min_dynamics = static_cast<int>(count.min);
    l.max_dynamics = static_cast<int>(count.max);
    index = 0;
    for (const auto& s : dj.at("slots")) {
      l.dynamics.push_back(read_dynamic_slot(s, where + " dynamic slot " + std::to_string(index++)));
    }
    if (l.min_dynamics < 0 || l.max_dynamics > static_cast<int>(l.dynamics.size())) {
      fail(ErrorKind::validation, where + ": dynamic count range exceeds declared slots");
    }
    c.layouts.push_back(std::move(l));
  }
  return c;
}

Catalog catalog_load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open catalog " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (buf.str().find_first_not_of(" \t\r\n") == std::string::npos) {
    fail(ErrorKind::validation, "catalog " + path.string() + " is empty");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "catalog " + path.string() + ": " + e.what());
  }
  return parse_catalog(j);
}

Catalog load_bundled_catalog() { return parse_catalog(nlohmann::json::parse(bundled_catalog_text())); }

StaticElement build_static(int id, const StaticSlot& slot, double x, double y, double angle,
                           double length, double thickness, double width, double height) {
  switch (slot.kind) {
    case StaticKind::ground:
      return make_ground(id, y);
    case StaticKind::left_wall:
    case StaticKind::right_wall:
      return make_wall(id, slot.kind, x);
    case StaticKind::ramp:
    case StaticKind::platform:
    case StaticKind::button:
      return make_bar(id, slot.kind, {x, y}, length, thickness, angle);
    case StaticKind::basket:
      return make_basket(id, {x, y}, width, height);
  }
  fail(ErrorKind::internal, "unreachable static kind");
}

SceneSpec sample_scene(const Catalog& catalog, int layout_id, std::uint64_t seed,
                       const SampleOptions& options) {
  const LayoutTemplate& layout = catalog.layout(layout_id);
  Rng rng(derive_seed({hash_string(catalog.catalog_version), static_cast<std::uint64_t>(layout_id), seed}));

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    SceneSpec scene;
    scene.scene_id = "L" + std::to_string(layout_id) + "-" + std::to_string(seed);
    scene.layout_id = layout_id;
    scene.rng_seed = seed;

    int next_static = 1;
    for (const auto& slot : layout.statics) {
      const double x = draw(rng, slot.x);
      const double y = draw(rng, slot.y);
      const double angle = draw(rng, slot.angle);
      const double length = draw(rng, slot.length);
      const double thickness = draw(rng, slot.thickness);
      const double width = draw(rng, slot.width);
      const double height = draw(rng, slot.height);
      scene.statics.push_back(
          build_static(next_static++, slot, x, y, angle, length, thickness, width, height));
    }

    const int count = static_cast<int>(rng.uniform_int(layout.min_dynamics, layout.max_dynamics));
    std::set<std::tuple<Size, Color, Shape>> used;
    bool ok = true;
    for (int i = 0; i < count && ok; ++i) {
      const DynamicSlot& slot = layout.dynamics[i];
      Shape shape{};
      Size size{};
      Color color{};
      do {
        shape = kAllShapes[rng.index(kAllShapes.size())];
        size = kAllSizes[rng.index(kAllSizes.size())];
        color = kAllColors[rng.index(kAllColors.size())];
      } while (used.contains({size, color, shape}));
      used.insert({size, color, shape});

      Vec2 velocity;
      if (slot.mode == SlotMode::intender) {
        const double speed = draw(rng, slot.speed);
        const double dir = draw(rng, slot.direction);
        velocity = {speed * std::cos(dir), speed * std::sin(dir)};
      }
      const Vec2 pos{draw(rng, slot.x), draw(rng, slot.y)};
      const double angle = draw(rng, slot.angle);
      scene.dynamics.push_back(make_dynamic(100 + i, shape, size, color, pos, angle, velocity));

      physics::World probe(scene, physics::SimConfig{});
      if (probe.min_separation() < -physics::kLinearSlop) ok = false;
    }
    if (ok) return scene;
  }
  fail(ErrorKind::sampling, "layout " + std::to_string(layout_id) + " seed " +
                                std::to_string(seed) + ": retry budget exhausted");
}

}  // namespace craft

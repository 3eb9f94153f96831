#include "scene.hpp"

#include <algorithm>
#include <cctype>

#include "error.hpp"

namespace craft {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& all) {
  for (E e : all) {
    if (iequals(s, name(e))) return e;
  }
  return std::nullopt;
}

Vec2 vec_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
nlohmann::json vec_to_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::simulation: return "simulation";
    case ErrorKind::sampling: return "sampling";
    case ErrorKind::type: return "type";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::stage: return "stage";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

std::string_view name(Shape s) {
  switch (s) {
    case Shape::cube: return "cube";
    case Shape::triangle: return "triangle";
    case Shape::circle: return "circle";
  }
  return "?";
}

std::string_view name(Size s) { return s == Size::small ? "small" : "large"; }

std::string_view name(Color c) {
  switch (c) {
    case Color::gray: return "gray";
    case Color::red: return "red";
    case Color::blue: return "blue";
    case Color::green: return "green";
    case Color::brown: return "brown";
    case Color::purple: return "purple";
    case Color::cyan: return "cyan";
    case Color::yellow: return "yellow";
  }
  return "?";
}

std::string_view name(StaticKind k) {
  switch (k) {
    case StaticKind::ramp: return "ramp";
    case StaticKind::platform: return "platform";
    case StaticKind::button: return "button";
    case StaticKind::basket: return "basket";
    case StaticKind::left_wall: return "left_wall";
    case StaticKind::right_wall: return "right_wall";
    case StaticKind::ground: return "ground";
  }
  return "?";
}

std::optional<Shape> parse_shape(std::string_view s) { return parse_enum(s, kAllShapes); }
std::optional<Size> parse_size(std::string_view s) { return parse_enum(s, kAllSizes); }
std::optional<Color> parse_color(std::string_view s) { return parse_enum(s, kAllColors); }
std::optional<StaticKind> parse_static_kind(std::string_view s) {
  return parse_enum(s, kAllStaticKinds);
}

double extent(Size s) { return s == Size::small ? 0.35 : 0.7; }

std::vector<Vec2> local_outline(Shape shape, double r) {
  switch (shape) {
    case Shape::cube:
      return {{-r, -r}, {r, -r}, {r, r}, {-r, r}};
    case Shape::triangle: {
      std::vector<Vec2> pts;
      for (int i = 0; i < 3; ++i) {
        const double a = kPi / 2.0 + i * 2.0 * kPi / 3.0;
        pts.push_back({r * std::cos(a), r * std::sin(a)});
      }
      return pts;
    }
    case Shape::circle:
      return {};
  }
  return {};
}

double shape_area(Shape shape, double r) {
  switch (shape) {
    case Shape::cube: return 4.0 * r * r;
    case Shape::triangle: return 3.0 * std::sqrt(3.0) / 4.0 * r * r;
    case Shape::circle: return kPi * r * r;
  }
  return 0.0;
}

DynamicObject make_dynamic(int id, Shape shape, Size size, Color color, Vec2 position,
                           double angle, Vec2 velocity) {
  DynamicObject d;
  d.id = id;
  d.shape = shape;
  d.size = size;
  d.color = color;
  d.position = position;
  d.angle = angle;
  d.linear_velocity = velocity;
  d.mass = MaterialDefaults::density * shape_area(shape, extent(size));
  return d;
}

const DynamicObject* SceneSpec::find_dynamic(int id) const {
  for (const auto& d : dynamics) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const StaticElement* SceneSpec::find_static(int id) const {
  for (const auto& s : statics) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

SceneSpec SceneSpec::without(int dynamic_id) const {
  if (!find_dynamic(dynamic_id)) {
    fail(ErrorKind::argument,
         "object " + std::to_string(dynamic_id) + " is not a dynamic object of " + scene_id);
  }
  SceneSpec out = *this;
  std::erase_if(out.dynamics, [&](const DynamicObject& d) { return d.id == dynamic_id; });
  return out;
}

std::vector<Vec2> box_polygon(Vec2 center, double half_w, double half_h, double angle) {
  const Transform xf(center, angle);
  return {apply(xf, {-half_w, -half_h}), apply(xf, {half_w, -half_h}),
          apply(xf, {half_w, half_h}), apply(xf, {-half_w, half_h})};
}

StaticElement make_ground(int id, double top_y, double x_min, double x_max) {
  StaticElement s;
  s.id = id;
  s.kind = StaticKind::ground;
  const double thickness = 1.0;
  s.position = {0.5 * (x_min + x_max), top_y};
  s.polygons.push_back(box_polygon({s.position.x, top_y - thickness / 2}, 0.5 * (x_max - x_min),
                                   thickness / 2));
  return s;
}

StaticElement make_wall(int id, StaticKind side, double inner_x, double height) {
  StaticElement s;
  s.id = id;
  s.kind = side;
  const double thickness = 1.0;
  const double cx = side == StaticKind::left_wall ? inner_x - thickness / 2 : inner_x + thickness / 2;
  s.position = {inner_x, height / 2 - 1.0};
  s.polygons.push_back(box_polygon({cx, height / 2 - 1.0}, thickness / 2, height / 2));
  return s;
}

StaticElement make_bar(int id, StaticKind kind, Vec2 center, double length, double thickness,
                       double angle) {
  StaticElement s;
  s.id = id;
  s.kind = kind;
  s.position = center;
  s.angle = angle;
  s.polygons.push_back(box_polygon(center, length / 2, thickness / 2, angle));
  return s;
}

StaticElement make_basket(int id, Vec2 bottom_center, double width, double height, double wall) {
  StaticElement s;
  s.id = id;
  s.kind = StaticKind::basket;
  s.position = bottom_center;
  const double half = width / 2;
  // floor, then the two side walls; the floor spans the full outer width
  s.polygons.push_back(box_polygon({bottom_center.x, bottom_center.y + wall / 2}, half, wall / 2));
  s.polygons.push_back(box_polygon({bottom_center.x - half + wall / 2, bottom_center.y + height / 2},
                                   wall / 2, height / 2));
  s.polygons.push_back(box_polygon({bottom_center.x + half - wall / 2, bottom_center.y + height / 2},
                                   wall / 2, height / 2));
  s.interior = Aabb{{bottom_center.x - half + wall, bottom_center.y + wall},
                    {bottom_center.x + half - wall, bottom_center.y + height}};
  return s;
}

nlohmann::json to_json(const DynamicObject& d) {
  return {{"id", d.id},
          {"shape", name(d.shape)},
          {"size", name(d.size)},
          {"color", name(d.color)},
          {"position", vec_to_json(d.position)},
          {"angle", d.angle},
          {"linear_velocity", vec_to_json(d.linear_velocity)},
          {"angular_velocity", d.angular_velocity},
          {"mass", d.mass},
          {"restitution", d.restitution},
          {"friction", d.friction}};
}

nlohmann::json to_json(const StaticElement& s) {
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& poly : s.polygons) {
    nlohmann::json p = nlohmann::json::array();
    for (Vec2 v : poly) p.push_back(vec_to_json(v));
    polys.push_back(std::move(p));
  }
  nlohmann::json j = {{"id", s.id},
                      {"kind", name(s.kind)},
                      {"position", vec_to_json(s.position)},
                      {"angle", s.angle},
                      {"restitution", s.restitution},
                      {"friction", s.friction},
                      {"polygons", std::move(polys)}};
  if (s.interior) {
    j["interior"] = {vec_to_json(s.interior->lo), vec_to_json(s.interior->hi)};
  }
  return j;
}

nlohmann::json to_json(const SceneSpec& s) {
  nlohmann::json statics = nlohmann::json::array();
  for (const auto& e : s.statics) statics.push_back(to_json(e));
  nlohmann::json dynamics = nlohmann::json::array();
  for (const auto& d : s.dynamics) dynamics.push_back(to_json(d));
  return {{"scene_id", s.scene_id},
          {"layout_id", s.layout_id},
          {"rng_seed", s.rng_seed},
          {"statics", std::move(statics)},
          {"dynamics", std::move(dynamics)}};
}

DynamicObject dynamic_from_json(const nlohmann::json& j) {
  DynamicObject d;
  d.id = j.at("id").get<int>();
  auto shape = parse_shape(j.at("shape").get<std::string>());
  auto size = parse_size(j.at("size").get<std::string>());
  auto color = parse_color(j.at("color").get<std::string>());
  if (!shape || !size || !color) {
    fail(ErrorKind::parse, "dynamic object " + std::to_string(d.id) + " has unknown attributes");
  }
  d.shape = *shape;
  d.size = *size;
  d.color = *color;
  d.position = vec_from_json(j.at("position"));
  d.angle = j.value("angle", 0.0);
  d.linear_velocity = j.contains("linear_velocity") ? vec_from_json(j["linear_velocity"]) : Vec2{};
  d.angular_velocity = j.value("angular_velocity", 0.0);
  d.mass = j.value("mass", MaterialDefaults::density * shape_area(d.shape, extent(d.size)));
  d.restitution = j.value("restitution", MaterialDefaults::restitution);
  d.friction = j.value("friction", MaterialDefaults::friction);
  if (!(d.mass > 0.0)) fail(ErrorKind::validation, "dynamic object mass must be positive");
  return d;
}

StaticElement static_from_json(const nlohmann::json& j) {
  StaticElement s;
  s.id = j.at("id").get<int>();
  auto kind = parse_static_kind(j.at("kind").get<std::string>());
  if (!kind) fail(ErrorKind::parse, "static element " + std::to_string(s.id) + " has unknown kind");
  s.kind = *kind;
  s.position = j.contains("position") ? vec_from_json(j["position"]) : Vec2{};
  s.angle = j.value("angle", 0.0);
  s.restitution = j.value("restitution", MaterialDefaults::static_restitution);
  s.friction = j.value("friction", MaterialDefaults::static_friction);
  for (const auto& poly : j.at("polygons")) {
    std::vector<Vec2> pts;
    for (const auto& v : poly) pts.push_back(vec_from_json(v));
    if (!is_convex_ccw(pts)) {
      fail(ErrorKind::validation,
           "static element " + std::to_string(s.id) + " has a non-convex or clockwise polygon");
    }
    s.polygons.push_back(std::move(pts));
  }
  if (j.contains("interior")) {
    s.interior = Aabb{vec_from_json(j["interior"].at(0)), vec_from_json(j["interior"].at(1))};
  }
  return s;
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  s.scene_id = j.at("scene_id").get<std::string>();
  s.layout_id = j.value("layout_id", 0);
  s.rng_seed = j.value("rng_seed", std::uint64_t{0});
  for (const auto& e : j.at("statics")) s.statics.push_back(static_from_json(e));
  for (const auto& d : j.at("dynamics")) s.dynamics.push_back(dynamic_from_json(d));
  return s;
}

}  // namespace craft

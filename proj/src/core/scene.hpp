#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geometry.hpp"

namespace craft {

enum class Shape { cube, triangle, circle };
enum class Size { small, large };
enum class Color { gray, red, blue, green, brown, purple, cyan, yellow };
enum class StaticKind { ramp, platform, button, basket, left_wall, right_wall, ground };

inline constexpr std::array kAllShapes{Shape::cube, Shape::triangle, Shape::circle};
inline constexpr std::array kAllSizes{Size::small, Size::large};
inline constexpr std::array kAllColors{Color::gray,  Color::red,    Color::blue, Color::green,
                                       Color::brown, Color::purple, Color::cyan, Color::yellow};
inline constexpr std::array kAllStaticKinds{StaticKind::ramp,      StaticKind::platform,
                                            StaticKind::button,    StaticKind::basket,
                                            StaticKind::left_wall, StaticKind::right_wall,
                                            StaticKind::ground};

std::string_view name(Shape s);
std::string_view name(Size s);
std::string_view name(Color c);
std::string_view name(StaticKind k);

// Case-insensitive; return nullopt for unknown words.
std::optional<Shape> parse_shape(std::string_view s);
std::optional<Size> parse_size(std::string_view s);
std::optional<Color> parse_color(std::string_view s);
std::optional<StaticKind> parse_static_kind(std::string_view s);

/// Radius for circles, half-width for cubes, circumradius for triangles.
double extent(Size s);

struct MaterialDefaults {
  static constexpr double density = 1.0;  // kg/m^2
  static constexpr double restitution = 0.2;
  static constexpr double friction = 0.4;
  static constexpr double static_restitution = 0.1;
  static constexpr double static_friction = 0.5;
};

struct DynamicObject {
  int id = 0;
  Shape shape = Shape::circle;
  Size size = Size::small;
  Color color = Color::gray;
  Vec2 position;
  double angle = 0.0;
  Vec2 linear_velocity;
  double angular_velocity = 0.0;
  double mass = 0.0;
  double restitution = MaterialDefaults::restitution;
  double friction = MaterialDefaults::friction;
};

/// Local-frame outline of a dynamic shape (empty for circles).
std::vector<Vec2> local_outline(Shape shape, double extent);
double shape_area(Shape shape, double extent);

/// Builds a dynamic object with mass derived from its area.
DynamicObject make_dynamic(int id, Shape shape, Size size, Color color, Vec2 position,
                           double angle = 0.0, Vec2 velocity = {});

struct StaticElement {
  int id = 0;
  StaticKind kind = StaticKind::ground;
  std::vector<std::vector<Vec2>> polygons;  // world frame, convex, CCW
  Vec2 position;
  double angle = 0.0;
  double restitution = MaterialDefaults::static_restitution;
  double friction = MaterialDefaults::static_friction;
  // Baskets only: the region an object center must enter.
  std::optional<Aabb> interior;
};

struct SceneSpec {
  std::string scene_id;
  int layout_id = 0;
  std::vector<StaticElement> statics;
  std::vector<DynamicObject> dynamics;
  std::uint64_t rng_seed = 0;

  const DynamicObject* find_dynamic(int id) const;
  const StaticElement* find_static(int id) const;
  /// Scene with one dynamic object removed; ids of the rest are unchanged.
  SceneSpec without(int dynamic_id) const;
};

// Geometry builders shared by the catalog and hand-built test scenes.
std::vector<Vec2> box_polygon(Vec2 center, double half_w, double half_h, double angle = 0.0);
StaticElement make_ground(int id, double top_y, double x_min = -1.0, double x_max = 11.0);
StaticElement make_wall(int id, StaticKind side, double inner_x, double height = 14.0);
StaticElement make_bar(int id, StaticKind kind, Vec2 center, double length, double thickness,
                       double angle);
StaticElement make_basket(int id, Vec2 bottom_center, double width, double height,
                          double wall = 0.12);

nlohmann::json to_json(const DynamicObject& d);
nlohmann::json to_json(const StaticElement& s);
nlohmann::json to_json(const SceneSpec& s);
DynamicObject dynamic_from_json(const nlohmann::json& j);
StaticElement static_from_json(const nlohmann::json& j);
SceneSpec scene_from_json(const nlohmann::json& j);

}  // namespace craft

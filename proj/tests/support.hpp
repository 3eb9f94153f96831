#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "counterfactual.hpp"
#include "dsl/evaluate.hpp"
#include "events.hpp"
#include "physics.hpp"
#include "scene.hpp"

namespace craft::testing {

// Hand-built scenes share one arena: ground top at y = 0 (id 1) and walls at
// x = 0 (id 2) and x = 10 (id 3). Extra statics take ids from 4.
inline SceneSpec arena(const std::string& scene_id = "micro") {
  SceneSpec s;
  s.scene_id = scene_id;
  s.statics.push_back(make_ground(1, 0.0));
  s.statics.push_back(make_wall(2, StaticKind::left_wall, 0.0));
  s.statics.push_back(make_wall(3, StaticKind::right_wall, 10.0));
  return s;
}

inline int next_static_id(const SceneSpec& s) {
  int id = 0;
  for (const auto& e : s.statics) id = std::max(id, e.id);
  return id + 1;
}

/// Floor basket with its bottom center at (x, 0); returns its id.
inline int add_basket(SceneSpec& s, double x, double width = 1.4, double height = 0.8, double y = 0.0) {
  const int id = next_static_id(s);
  s.statics.push_back(make_basket(id, {x, y}, width, height));
  return id;
}

inline int add_bar(SceneSpec& s, StaticKind kind, Vec2 center, double length, double angle = 0.0,
                   double thickness = 0.2) {
  const int id = next_static_id(s);
  s.statics.push_back(make_bar(id, kind, center, length, thickness, angle));
  return id;
}

inline int add_dynamic(SceneSpec& s, Shape shape, Size size, Color color, Vec2 position, Vec2 velocity = {},
                       double angle = 0.0) {
  const int id = 100 + static_cast<int>(s.dynamics.size());
  s.dynamics.push_back(make_dynamic(id, shape, size, color, position, angle, velocity));
  return id;
}

/// Height at which a shape of `size` rests on a surface at y = top.
inline double resting_y(Shape shape, Size size, double top = 0.0) {
  const double r = extent(size);
  switch (shape) {
    case Shape::circle:
    case Shape::cube: return top + r;
    case Shape::triangle: return top + r / 2.0;
  }
  return top + r;
}

struct Run {
  SceneSpec scene;
  physics::SimulationTrace trace;
  std::vector<Event> events;
};

inline physics::SimConfig sim_config(double duration = 10.0) {
  physics::SimConfig c;
  c.duration = duration;
  return c;
}

inline Run run(const SceneSpec& scene, double duration = 10.0) {
  Run r{scene, physics::simulate(scene, sim_config(duration)), {}};
  r.events = extract_events(r.trace, scene);
  return r;
}

inline dsl::SimContext context(const Run& r, double duration = 10.0) {
  auto cache = std::make_shared<VariationCache>(sim_config(duration));
  return dsl::make_context(r.scene, r.trace, r.events, cache);
}

inline std::size_t count_type(const std::vector<Event>& events, EventType t) {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [&](const Event& e) { return e.type == t; }));
}

// A ball on the apex of two ramps, with a red cube below on the left and a
// blue cube on the right; it tips towards whichever side it is offset to.
inline SceneSpec knife_edge_scene(double offset) {
  SceneSpec s = arena("knife-edge");
  add_bar(s, StaticKind::ramp, {4.118, 1.6}, 2.0, 0.4);
  add_bar(s, StaticKind::ramp, {5.882, 1.6}, 2.0, -0.4);
  add_dynamic(s, Shape::circle, Size::small, Color::green, {5.0 + offset, 2.44});
  add_dynamic(s, Shape::cube, Size::small, Color::red, {1.5, 0.35});
  add_dynamic(s, Shape::cube, Size::small, Color::blue, {8.5, 0.35});
  return s;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("craft-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace craft::testing

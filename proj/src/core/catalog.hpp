#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scene.hpp"

namespace craft {

struct Interval {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min - 1e-12 && v <= max + 1e-12; }
};

/// One static element of a layout with the ranges its attributes are drawn from.
/// Which intervals apply depends on the kind:
///   ground: y (top surface); left_wall/right_wall: x (inner face);
///   ramp/platform/button: x, y (center), angle, length, thickness;
///   basket: x, y (floor bottom center), width, height.
struct StaticSlot {
  std::string name;
  StaticKind kind = StaticKind::ground;
  Interval x, y, angle, length, thickness{0.2, 0.2}, width, height;
};

enum class SlotMode { intender, resting };

struct DynamicSlot {
  Interval x, y;
  SlotMode mode = SlotMode::resting;
  Interval speed{0.0, 0.0};
  Interval direction{0.0, 0.0};  // radians, counter-clockwise from +x
  Interval angle{0.0, 0.0};
};

struct LayoutTemplate {
  int layout_id = 0;
  std::string name;
  std::vector<StaticSlot> statics;
  int min_dynamics = 1;
  int max_dynamics = 1;
  std::vector<DynamicSlot> dynamics;  // the first n slots are used for n objects
};

struct Catalog {
  std::string catalog_version;
  std::vector<LayoutTemplate> layouts;

  const LayoutTemplate& layout(int layout_id) const;
  std::vector<int> layout_ids() const;
};

Catalog parse_catalog(const nlohmann::json& j);
Catalog catalog_load(const std::filesystem::path& path);
Catalog load_bundled_catalog();
std::string bundled_catalog_text();

struct SampleOptions {
  int max_attempts = 200;  // whole-scene retries
};

/// Deterministic in (catalog version, layout id, seed). Static ids start at 1,
/// dynamic ids at 100.
SceneSpec sample_scene(const Catalog& catalog, int layout_id, std::uint64_t seed,
                       const SampleOptions& options = {});

/// Builds the static element of `slot` with the given attribute values.
StaticElement build_static(int id, const StaticSlot& slot, double x, double y, double angle,
                           double length, double thickness, double width, double height);

}  // namespace craft

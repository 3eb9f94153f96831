#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "geometry.hpp"

namespace craft::physics {

inline constexpr double kLinearSlop = 0.005;
inline constexpr int kMaxPolygonVertices = 8;

/// Convex collision shape in body-local coordinates.
struct CollisionShape {
  enum class Type { circle, polygon };
  Type type = Type::circle;
  double radius = 0.0;  // circles only
  Vec2 center;          // circles only
  std::vector<Vec2> vertices;
  std::vector<Vec2> normals;

  static CollisionShape circle(double radius, Vec2 center = {});
  /// vertices must be convex and counter-clockwise.
  static CollisionShape polygon(std::vector<Vec2> vertices);

  Aabb bounds(const Transform& xf) const;
};

// Contact feature identifier; persistent across steps for warm starting.
struct FeatureKey {
  std::uint8_t index_a = 0;
  std::uint8_t index_b = 0;
  std::uint8_t type_a = 0;
  std::uint8_t type_b = 0;

  std::uint32_t packed() const {
    return std::uint32_t(index_a) | std::uint32_t(index_b) << 8 | std::uint32_t(type_a) << 16 |
           std::uint32_t(type_b) << 24;
  }
};

struct ManifoldPoint {
  Vec2 local_point;
  double normal_impulse = 0.0;
  double tangent_impulse = 0.0;
  FeatureKey key;
};

struct Manifold {
  enum class Type { circles, face_a, face_b };
  Type type = Type::circles;
  Vec2 local_normal;
  Vec2 local_point;
  int point_count = 0;
  std::array<ManifoldPoint, 2> points{};
};

struct WorldManifold {
  Vec2 normal;  // from A to B
  std::array<Vec2, 2> points{};
  std::array<double, 2> separations{};
};

/// Points are generated while separation <= margin.
Manifold collide(const CollisionShape& a, const Transform& xf_a, const CollisionShape& b,
                 const Transform& xf_b, double margin);

WorldManifold world_manifold(const Manifold& m, const CollisionShape& a, const Transform& xf_a,
                             const CollisionShape& b, const Transform& xf_b);

struct PositionSample {
  Vec2 normal;
  Vec2 point;
  double separation = 0.0;
};

/// Re-evaluates manifold point `index` at (possibly moved) transforms.
PositionSample position_sample(const Manifold& m, int index, const CollisionShape& a,
                               const Transform& xf_a, const CollisionShape& b,
                               const Transform& xf_b);

/// Whether a collide() call needs the shapes swapped (polygon must be A against a circle).
inline bool needs_swap(const CollisionShape& a, const CollisionShape& b) {
  return a.type == CollisionShape::Type::circle && b.type == CollisionShape::Type::polygon;
}

}  // namespace craft::physics

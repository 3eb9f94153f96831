#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace craft {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 cross(Vec2 v, double s) { return {s * v.y, -s * v.x}; }
inline Vec2 cross(double s, Vec2 v) { return {-s * v.y, s * v.x}; }
inline double length(Vec2 v) { return std::sqrt(dot(v, v)); }
inline double length_squared(Vec2 v) { return dot(v, v); }
inline double distance(Vec2 a, Vec2 b) { return length(a - b); }
inline Vec2 perp_right(Vec2 v) { return {v.y, -v.x}; }

inline Vec2 normalized(Vec2 v) {
  const double len = length(v);
  if (len < 1e-15) return {0.0, 0.0};
  return {v.x / len, v.y / len};
}

struct Rot {
  double s = 0.0;
  double c = 1.0;

  Rot() = default;
  explicit Rot(double angle) : s(std::sin(angle)), c(std::cos(angle)) {}
};

inline Vec2 rotate(const Rot& q, Vec2 v) { return {q.c * v.x - q.s * v.y, q.s * v.x + q.c * v.y}; }
inline Vec2 inv_rotate(const Rot& q, Vec2 v) { return {q.c * v.x + q.s * v.y, -q.s * v.x + q.c * v.y}; }

struct Transform {
  Vec2 p;
  Rot q;

  Transform() = default;
  Transform(Vec2 position, double angle) : p(position), q(angle) {}
};

inline Vec2 apply(const Transform& t, Vec2 v) { return rotate(t.q, v) + t.p; }
inline Vec2 apply_inverse(const Transform& t, Vec2 v) { return inv_rotate(t.q, v - t.p); }

struct Aabb {
  Vec2 lo;
  Vec2 hi;

  bool overlaps(const Aabb& o, double margin = 0.0) const {
    return lo.x - margin <= o.hi.x && o.lo.x - margin <= hi.x &&
           lo.y - margin <= o.hi.y && o.lo.y - margin <= hi.y;
  }
  bool contains(Vec2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
};

/// Signed area of a simple polygon; positive for counter-clockwise winding.
inline double signed_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a += cross(pts[i], pts[(i + 1) % pts.size()]);
  }
  return 0.5 * a;
}

inline Vec2 polygon_centroid(const std::vector<Vec2>& pts) {
  const double area = signed_area(pts);
  Vec2 c;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[(i + 1) % pts.size()];
    c += (cross(a, b)) * (a + b);
  }
  return (1.0 / (6.0 * area)) * c;
}

/// True if pts is a strictly convex counter-clockwise polygon with >= 3 vertices.
inline bool is_convex_ccw(const std::vector<Vec2>& pts) {
  if (pts.size() < 3) return false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[(i + 1) % pts.size()];
    const Vec2 c = pts[(i + 2) % pts.size()];
    if (cross(b - a, c - b) <= 1e-12) return false;
  }
  return true;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace craft

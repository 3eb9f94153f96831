#include "collision.hpp"

#include <limits>

#include "error.hpp"

namespace craft::physics {

namespace {

constexpr double kMaxDouble = std::numeric_limits<double>::max();
constexpr std::uint8_t kVertex = 0;
constexpr std::uint8_t kFace = 1;

struct ClipVertex {
  Vec2 v;
  FeatureKey id;
};

Transform relative(const Transform& a, const Transform& b) {
  // b^-1 * a: maps frame-a points into frame b.
  Transform out;
  out.q.s = b.q.c * a.q.s - b.q.s * a.q.c;
  out.q.c = b.q.c * a.q.c + b.q.s * a.q.s;
  out.p = inv_rotate(b.q, a.p - b.p);
  return out;
}

double find_max_separation(int& edge_index, const CollisionShape& poly1, const Transform& xf1,
                           const CollisionShape& poly2, const Transform& xf2) {
  const Transform xf = relative(xf1, xf2);
  int best = 0;
  double max_sep = -kMaxDouble;
  for (std::size_t i = 0; i < poly1.vertices.size(); ++i) {
    const Vec2 n = rotate(xf.q, poly1.normals[i]);
    const Vec2 v1 = apply(xf, poly1.vertices[i]);
    double si = kMaxDouble;
    for (const Vec2& v2 : poly2.vertices) {
      si = std::min(si, dot(n, v2 - v1));
    }
    if (si > max_sep) {
      max_sep = si;
      best = static_cast<int>(i);
    }
  }
  edge_index = best;
  return max_sep;
}

void find_incident_edge(std::array<ClipVertex, 2>& c, const CollisionShape& poly1,
                        const Transform& xf1, int edge1, const CollisionShape& poly2,
                        const Transform& xf2) {
  const Vec2 normal1 = inv_rotate(xf2.q, rotate(xf1.q, poly1.normals[edge1]));
  int index = 0;
  double min_dot = kMaxDouble;
  for (std::size_t i = 0; i < poly2.normals.size(); ++i) {
    const double d = dot(normal1, poly2.normals[i]);
    if (d < min_dot) {
      min_dot = d;
      index = static_cast<int>(i);
    }
  }
  const int i1 = index;
  const int i2 = i1 + 1 < static_cast<int>(poly2.vertices.size()) ? i1 + 1 : 0;
  c[0].v = apply(xf2, poly2.vertices[i1]);
  c[0].id = {static_cast<std::uint8_t>(edge1), static_cast<std::uint8_t>(i1), kFace, kVertex};
  c[1].v = apply(xf2, poly2.vertices[i2]);
  c[1].id = {static_cast<std::uint8_t>(edge1), static_cast<std::uint8_t>(i2), kFace, kVertex};
}

int clip_segment_to_line(std::array<ClipVertex, 2>& out, const std::array<ClipVertex, 2>& in,
                         Vec2 normal, double offset, int vertex_index_a) {
  int count = 0;
  const double d0 = dot(normal, in[0].v) - offset;
  const double d1 = dot(normal, in[1].v) - offset;
  if (d0 <= 0.0) out[count++] = in[0];
  if (d1 <= 0.0) out[count++] = in[1];
  if (d0 * d1 < 0.0 && count < 2) {
    const double t = d0 / (d0 - d1);
    out[count].v = in[0].v + t * (in[1].v - in[0].v);
    out[count].id = {static_cast<std::uint8_t>(vertex_index_a), in[0].id.index_b, kVertex, kFace};
    ++count;
  }
  return count;
}

Manifold collide_circles(const CollisionShape& a, const Transform& xf_a, const CollisionShape& b,
                         const Transform& xf_b, double margin) {
  Manifold m;
  const Vec2 pa = apply(xf_a, a.center);
  const Vec2 pb = apply(xf_b, b.center);
  const double r = a.radius + b.radius + margin;
  if (length_squared(pb - pa) > r * r) return m;
  m.type = Manifold::Type::circles;
  m.local_point = a.center;
  m.point_count = 1;
  m.points[0].local_point = b.center;
  return m;
}

Manifold collide_polygon_circle(const CollisionShape& poly, const Transform& xf_a,
                                const CollisionShape& circle, const Transform& xf_b,
                                double margin) {
  Manifold m;
  const Vec2 c = apply(xf_b, circle.center);
  const Vec2 c_local = apply_inverse(xf_a, c);
  const double radius = circle.radius + margin;
  const int count = static_cast<int>(poly.vertices.size());

  int normal_index = 0;
  double separation = -kMaxDouble;
  for (int i = 0; i < count; ++i) {
    const double s = dot(poly.normals[i], c_local - poly.vertices[i]);
    if (s > radius) return m;
    if (s > separation) {
      separation = s;
      normal_index = i;
    }
  }

  const int i1 = normal_index;
  const int i2 = i1 + 1 < count ? i1 + 1 : 0;
  const Vec2 v1 = poly.vertices[i1];
  const Vec2 v2 = poly.vertices[i2];

  m.point_count = 1;
  m.type = Manifold::Type::face_a;
  m.points[0].local_point = circle.center;

  if (separation < 1e-12) {
    m.local_normal = poly.normals[i1];
    m.local_point = 0.5 * (v1 + v2);
    return m;
  }

  const double u1 = dot(c_local - v1, v2 - v1);
  const double u2 = dot(c_local - v2, v1 - v2);
  if (u1 <= 0.0) {
    if (length_squared(c_local - v1) > radius * radius) return Manifold{};
    m.local_normal = normalized(c_local - v1);
    m.local_point = v1;
    m.points[0].key = {static_cast<std::uint8_t>(i1), 0, kVertex, kVertex};
  } else if (u2 <= 0.0) {
    if (length_squared(c_local - v2) > radius * radius) return Manifold{};
    m.local_normal = normalized(c_local - v2);
    m.local_point = v2;
    m.points[0].key = {static_cast<std::uint8_t>(i2), 0, kVertex, kVertex};
  } else {
    const Vec2 face_center = 0.5 * (v1 + v2);
    if (dot(c_local - face_center, poly.normals[i1]) > radius) return Manifold{};
    m.local_normal = poly.normals[i1];
    m.local_point = face_center;
    m.points[0].key = {static_cast<std::uint8_t>(i1), 0, kFace, kVertex};
  }
  return m;
}

// Reference-face clipping. When both faces separate equally (vertex on vertex),
// the reference face is the one whose normal best follows the centroid axis.
Manifold collide_polygons(const CollisionShape& a, const Transform& xf_a, const CollisionShape& b,
                          const Transform& xf_b, double margin) {
  Manifold m;
  int edge_a = 0;
  const double sep_a = find_max_separation(edge_a, a, xf_a, b, xf_b);
  if (sep_a > margin) return m;
  int edge_b = 0;
  const double sep_b = find_max_separation(edge_b, b, xf_b, a, xf_a);
  if (sep_b > margin) return m;

  constexpr double kTol = 0.1 * kLinearSlop;
  bool use_b = sep_b > sep_a + kTol;
  if (!use_b && std::abs(sep_b - sep_a) <= kTol) {
    const Vec2 axis = normalized(xf_b.p - xf_a.p);
    const double align_a = dot(rotate(xf_a.q, a.normals[edge_a]), axis);
    const double align_b = dot(rotate(xf_b.q, b.normals[edge_b]), -axis);
    use_b = align_b > align_a + 1e-9;
  }

  const CollisionShape& poly1 = use_b ? b : a;
  const CollisionShape& poly2 = use_b ? a : b;
  const Transform& xf1 = use_b ? xf_b : xf_a;
  const Transform& xf2 = use_b ? xf_a : xf_b;
  const int edge1 = use_b ? edge_b : edge_a;
  m.type = use_b ? Manifold::Type::face_b : Manifold::Type::face_a;

  std::array<ClipVertex, 2> incident{};
  find_incident_edge(incident, poly1, xf1, edge1, poly2, xf2);

  const int count1 = static_cast<int>(poly1.vertices.size());
  const int iv1 = edge1;
  const int iv2 = edge1 + 1 < count1 ? edge1 + 1 : 0;
  Vec2 v11 = poly1.vertices[iv1];
  Vec2 v12 = poly1.vertices[iv2];
  const Vec2 local_tangent = normalized(v12 - v11);
  const Vec2 local_normal = cross(local_tangent, 1.0);
  const Vec2 plane_point = 0.5 * (v11 + v12);
  const Vec2 tangent = rotate(xf1.q, local_tangent);
  const Vec2 normal = cross(tangent, 1.0);
  v11 = apply(xf1, v11);
  v12 = apply(xf1, v12);

  const double front_offset = dot(normal, v11);
  const double side_offset1 = -dot(tangent, v11) + margin;
  const double side_offset2 = dot(tangent, v12) + margin;

  std::array<ClipVertex, 2> clip1{};
  std::array<ClipVertex, 2> clip2{};
  if (clip_segment_to_line(clip1, incident, -tangent, side_offset1, iv1) < 2) return m;
  if (clip_segment_to_line(clip2, clip1, tangent, side_offset2, iv2) < 2) return m;

  m.local_normal = local_normal;
  m.local_point = plane_point;
  int n = 0;
  for (const auto& cv : clip2) {
    const double separation = dot(normal, cv.v) - front_offset;
    if (separation <= margin) {
      ManifoldPoint& mp = m.points[n];
      mp.local_point = apply_inverse(xf2, cv.v);
      mp.key = cv.id;
      if (use_b) {
        std::swap(mp.key.index_a, mp.key.index_b);
        std::swap(mp.key.type_a, mp.key.type_b);
      }
      ++n;
    }
  }
  m.point_count = n;
  return m;
}

}  // namespace

CollisionShape CollisionShape::circle(double radius, Vec2 center) {
  CollisionShape s;
  s.type = Type::circle;
  s.radius = radius;
  s.center = center;
  return s;
}

CollisionShape CollisionShape::polygon(std::vector<Vec2> vertices) {
  if (vertices.size() > kMaxPolygonVertices || !is_convex_ccw(vertices)) {
    fail(ErrorKind::validation, "collision polygon must be convex, counter-clockwise, <= 8 vertices");
  }
  CollisionShape s;
  s.type = Type::polygon;
  s.vertices = std::move(vertices);
  for (std::size_t i = 0; i < s.vertices.size(); ++i) {
    const Vec2 edge = s.vertices[(i + 1) % s.vertices.size()] - s.vertices[i];
    s.normals.push_back(normalized(cross(edge, 1.0)));
  }
  return s;
}

Aabb CollisionShape::bounds(const Transform& xf) const {
  if (type == Type::circle) {
    const Vec2 c = apply(xf, center);
    return {{c.x - radius, c.y - radius}, {c.x + radius, c.y + radius}};
  }
  Aabb box{{kMaxDouble, kMaxDouble}, {-kMaxDouble, -kMaxDouble}};
  for (const Vec2& v : vertices) {
    const Vec2 w = apply(xf, v);
    box.lo = {std::min(box.lo.x, w.x), std::min(box.lo.y, w.y)};
    box.hi = {std::max(box.hi.x, w.x), std::max(box.hi.y, w.y)};
  }
  return box;
}

Manifold collide(const CollisionShape& a, const Transform& xf_a, const CollisionShape& b,
                 const Transform& xf_b, double margin) {
  using T = CollisionShape::Type;
  if (a.type == T::circle && b.type == T::circle) return collide_circles(a, xf_a, b, xf_b, margin);
  if (a.type == T::polygon && b.type == T::circle) {
    return collide_polygon_circle(a, xf_a, b, xf_b, margin);
  }
  if (a.type == T::polygon && b.type == T::polygon) {
    return collide_polygons(a, xf_a, b, xf_b, margin);
  }
  fail(ErrorKind::internal, "collide: circle-polygon pairs must be ordered polygon first");
}

WorldManifold world_manifold(const Manifold& m, const CollisionShape& a, const Transform& xf_a,
                             const CollisionShape& b, const Transform& xf_b) {
  WorldManifold wm;
  if (m.point_count == 0) return wm;
  const double ra = a.type == CollisionShape::Type::circle ? a.radius : 0.0;
  const double rb = b.type == CollisionShape::Type::circle ? b.radius : 0.0;
  switch (m.type) {
    case Manifold::Type::circles: {
      wm.normal = {1.0, 0.0};
      const Vec2 pa = apply(xf_a, m.local_point);
      const Vec2 pb = apply(xf_b, m.points[0].local_point);
      if (length_squared(pa - pb) > 1e-24) wm.normal = normalized(pb - pa);
      const Vec2 ca = pa + ra * wm.normal;
      const Vec2 cb = pb - rb * wm.normal;
      wm.points[0] = 0.5 * (ca + cb);
      wm.separations[0] = dot(cb - ca, wm.normal);
      break;
    }
    case Manifold::Type::face_a: {
      wm.normal = rotate(xf_a.q, m.local_normal);
      const Vec2 plane = apply(xf_a, m.local_point);
      for (int i = 0; i < m.point_count; ++i) {
        const Vec2 clip = apply(xf_b, m.points[i].local_point);
        const Vec2 ca = clip + (ra - dot(clip - plane, wm.normal)) * wm.normal;
        const Vec2 cb = clip - rb * wm.normal;
        wm.points[i] = 0.5 * (ca + cb);
        wm.separations[i] = dot(cb - ca, wm.normal);
      }
      break;
    }
    case Manifold::Type::face_b: {
      wm.normal = rotate(xf_b.q, m.local_normal);
      const Vec2 plane = apply(xf_b, m.local_point);
      for (int i = 0; i < m.point_count; ++i) {
        const Vec2 clip = apply(xf_a, m.points[i].local_point);
        const Vec2 cb = clip + (rb - dot(clip - plane, wm.normal)) * wm.normal;
        const Vec2 ca = clip - ra * wm.normal;
        wm.points[i] = 0.5 * (ca + cb);
        wm.separations[i] = dot(ca - cb, wm.normal);
      }
      wm.normal = -wm.normal;
      break;
    }
  }
  return wm;
}

PositionSample position_sample(const Manifold& m, int index, const CollisionShape& a,
                               const Transform& xf_a, const CollisionShape& b,
                               const Transform& xf_b) {
  PositionSample out;
  const double ra = a.type == CollisionShape::Type::circle ? a.radius : 0.0;
  const double rb = b.type == CollisionShape::Type::circle ? b.radius : 0.0;
  switch (m.type) {
    case Manifold::Type::circles: {
      const Vec2 pa = apply(xf_a, m.local_point);
      const Vec2 pb = apply(xf_b, m.points[0].local_point);
      out.normal = length_squared(pb - pa) > 1e-24 ? normalized(pb - pa) : Vec2{1.0, 0.0};
      out.point = 0.5 * (pa + pb);
      out.separation = dot(pb - pa, out.normal) - ra - rb;
      break;
    }
    case Manifold::Type::face_a: {
      out.normal = rotate(xf_a.q, m.local_normal);
      const Vec2 plane = apply(xf_a, m.local_point);
      const Vec2 clip = apply(xf_b, m.points[index].local_point);
      out.separation = dot(clip - plane, out.normal) - ra - rb;
      out.point = clip;
      break;
    }
    case Manifold::Type::face_b: {
      out.normal = rotate(xf_b.q, m.local_normal);
      const Vec2 plane = apply(xf_b, m.local_point);
      const Vec2 clip = apply(xf_a, m.points[index].local_point);
      out.separation = dot(clip - plane, out.normal) - ra - rb;
      out.point = clip;
      out.normal = -out.normal;
      break;
    }
  }
  return out;
}

}  // namespace craft::physics

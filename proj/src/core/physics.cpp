#include "physics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "error.hpp"

namespace craft::physics {

int SimConfig::tick_count() const { return static_cast<int>(std::lround(duration / dt)); }

struct World::Body {
  int id = 0;
  bool is_static = true;
  std::vector<CollisionShape> shapes;
  std::vector<Aabb> static_bounds;  // statics only, world frame
  Vec2 position;
  double angle = 0.0;
  Vec2 velocity;
  double angular_velocity = 0.0;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;
  double restitution = 0.0;
  double friction = 0.0;

  Transform xf() const { return is_static ? Transform{} : Transform(position, angle); }
};

struct World::Contact {
  std::size_t a = 0;  // body indices in collide() order
  std::size_t b = 0;
  int shape_a = 0;
  int shape_b = 0;
  Manifold manifold;
  double friction = 0.0;
  double restitution = 0.0;
  Vec2 normal;
  struct SolverPoint {
    Vec2 ra;
    Vec2 rb;
    double normal_mass = 0.0;
    double tangent_mass = 0.0;
    double velocity_bias = 0.0;
  };
  std::array<SolverPoint, 2> solver{};

  auto key() const {
    return std::make_tuple(std::min(a, b), std::max(a, b), a < b ? shape_a : shape_b,
                           a < b ? shape_b : shape_a);
  }
};

namespace {

double polygon_unit_inertia(const std::vector<Vec2>& verts) {
  // second moment about the origin for unit density, divided by area
  double area = 0.0;
  double inertia = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Vec2 e1 = verts[i];
    const Vec2 e2 = verts[(i + 1) % verts.size()];
    const double d = cross(e1, e2);
    area += 0.5 * d;
    const double intx2 = e1.x * e1.x + e2.x * e1.x + e2.x * e2.x;
    const double inty2 = e1.y * e1.y + e2.y * e1.y + e2.y * e2.y;
    inertia += (0.25 / 3.0 * d) * (intx2 + inty2);
  }
  return inertia / area;
}

double mix_friction(double a, double b) { return std::sqrt(a * b); }
double mix_restitution(double a, double b) { return std::max(a, b); }

}  // namespace

World::~World() = default;
World::World(World&&) noexcept = default;
World& World::operator=(World&&) noexcept = default;

World::World(const SceneSpec& scene, const SimConfig& config) : config_(config) {
  for (const auto& s : scene.statics) {
    Body b;
    b.id = s.id;
    b.is_static = true;
    b.restitution = s.restitution;
    b.friction = s.friction;
    for (const auto& poly : s.polygons) {
      b.shapes.push_back(CollisionShape::polygon(poly));
      b.static_bounds.push_back(b.shapes.back().bounds(Transform{}));
    }
    bodies_.push_back(std::move(b));
  }
  for (const auto& d : scene.dynamics) {
    Body b;
    b.id = d.id;
    b.is_static = false;
    b.position = d.position;
    b.angle = d.angle;
    b.velocity = d.linear_velocity;
    b.angular_velocity = d.angular_velocity;
    b.restitution = d.restitution;
    b.friction = d.friction;
    const double r = extent(d.size);
    double unit_inertia = 0.0;
    if (d.shape == Shape::circle) {
      b.shapes.push_back(CollisionShape::circle(r));
      unit_inertia = 0.5 * r * r;
    } else {
      auto outline = local_outline(d.shape, r);
      unit_inertia = polygon_unit_inertia(outline);
      b.shapes.push_back(CollisionShape::polygon(std::move(outline)));
    }
    b.inv_mass = 1.0 / d.mass;
    b.inv_inertia = 1.0 / (d.mass * unit_inertia);
    bodies_.push_back(std::move(b));
  }
  std::stable_sort(bodies_.begin(), bodies_.end(),
                   [](const Body& x, const Body& y) { return x.id < y.id; });
  // state() reports dynamics in scene order
  for (const auto& d : scene.dynamics) {
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      if (bodies_[i].id == d.id && !bodies_[i].is_static) dynamic_order_.push_back(i);
    }
  }
}

void World::update_contacts() {
  std::vector<Contact> fresh;
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const Body& bi = bodies_[i];
    const Transform xi = bi.xf();
    for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
      const Body& bj = bodies_[j];
      if (bi.is_static && bj.is_static) continue;
      const Transform xj = bj.xf();
      for (std::size_t si = 0; si < bi.shapes.size(); ++si) {
        const Aabb box_i = bi.is_static ? bi.static_bounds[si] : bi.shapes[si].bounds(xi);
        for (std::size_t sj = 0; sj < bj.shapes.size(); ++sj) {
          const Aabb box_j = bj.is_static ? bj.static_bounds[sj] : bj.shapes[sj].bounds(xj);
          if (!box_i.overlaps(box_j, kLinearSlop)) continue;
          Contact c;
          const bool swap = needs_swap(bi.shapes[si], bj.shapes[sj]);
          c.a = swap ? j : i;
          c.b = swap ? i : j;
          c.shape_a = static_cast<int>(swap ? sj : si);
          c.shape_b = static_cast<int>(swap ? si : sj);
          const Body& ba = bodies_[c.a];
          const Body& bb = bodies_[c.b];
          c.manifold = collide(ba.shapes[c.shape_a], ba.xf(), bb.shapes[c.shape_b], bb.xf(),
                               kLinearSlop);
          if (c.manifold.point_count == 0) continue;
          c.friction = mix_friction(ba.friction, bb.friction);
          c.restitution = mix_restitution(ba.restitution, bb.restitution);
          fresh.push_back(c);
        }
      }
    }
  }
  // warm start from the previous step; both lists are in the same key order
  std::size_t k = 0;
  for (auto& c : fresh) {
    while (k < contacts_.size() && contacts_[k].key() < c.key()) ++k;
    if (k < contacts_.size() && contacts_[k].key() == c.key() &&
        contacts_[k].manifold.type == c.manifold.type) {
      const Manifold& old = contacts_[k].manifold;
      for (int p = 0; p < c.manifold.point_count; ++p) {
        for (int q = 0; q < old.point_count; ++q) {
          if (old.points[q].key.packed() == c.manifold.points[p].key.packed()) {
            c.manifold.points[p].normal_impulse = old.points[q].normal_impulse;
            c.manifold.points[p].tangent_impulse = old.points[q].tangent_impulse;
          }
        }
      }
    }
  }
  contacts_ = std::move(fresh);
}

void World::record_contacts(bool include_impulse) {
  std::map<std::pair<int, int>, ContactRecord> pairs;
  for (const auto& c : contacts_) {
    const Body& ba = bodies_[c.a];
    const Body& bb = bodies_[c.b];
    const WorldManifold wm = world_manifold(c.manifold, ba.shapes[c.shape_a], ba.xf(),
                                            bb.shapes[c.shape_b], bb.xf());
    const bool a_first = ba.id < bb.id;
    const Vec2 normal = a_first ? wm.normal : -wm.normal;
    auto [it, inserted] = pairs.try_emplace({std::min(ba.id, bb.id), std::max(ba.id, bb.id)});
    ContactRecord& rec = it->second;
    if (inserted) {
      rec.a = std::min(ba.id, bb.id);
      rec.b = std::max(ba.id, bb.id);
      rec.normal = normal;
    }
    for (int p = 0; p < c.manifold.point_count; ++p) {
      const Vec2 ra = wm.points[p] - ba.position;
      const Vec2 rb = wm.points[p] - bb.position;
      const Vec2 dv = bb.velocity + cross(bb.angular_velocity, rb) - ba.velocity -
                      cross(ba.angular_velocity, ra);
      rec.normal_speed = std::max(rec.normal_speed, -dot(dv, wm.normal));
      if (include_impulse) rec.normal_impulse += c.manifold.points[p].normal_impulse;
    }
  }
  last_contacts_.clear();
  for (auto& [key, rec] : pairs) last_contacts_.push_back(rec);
}

void World::solve_velocities(double dt) {
  for (auto& body : bodies_) {
    if (body.is_static) continue;
    body.velocity += dt * config_.gravity;
    body.angular_velocity *= 1.0 / (1.0 + dt * config_.angular_damping);
  }

  for (auto& c : contacts_) {
    Body& ba = bodies_[c.a];
    Body& bb = bodies_[c.b];
    const WorldManifold wm = world_manifold(c.manifold, ba.shapes[c.shape_a], ba.xf(),
                                            bb.shapes[c.shape_b], bb.xf());
    c.normal = wm.normal;
    const Vec2 tangent = cross(c.normal, 1.0);
    for (int p = 0; p < c.manifold.point_count; ++p) {
      auto& sp = c.solver[p];
      sp.ra = wm.points[p] - ba.position;
      sp.rb = wm.points[p] - bb.position;
      const double rna = cross(sp.ra, c.normal);
      const double rnb = cross(sp.rb, c.normal);
      const double kn = ba.inv_mass + bb.inv_mass + ba.inv_inertia * rna * rna +
                        bb.inv_inertia * rnb * rnb;
      sp.normal_mass = kn > 0.0 ? 1.0 / kn : 0.0;
      const double rta = cross(sp.ra, tangent);
      const double rtb = cross(sp.rb, tangent);
      const double kt = ba.inv_mass + bb.inv_mass + ba.inv_inertia * rta * rta +
                        bb.inv_inertia * rtb * rtb;
      sp.tangent_mass = kt > 0.0 ? 1.0 / kt : 0.0;
      const Vec2 dv = bb.velocity + cross(bb.angular_velocity, sp.rb) - ba.velocity -
                      cross(ba.angular_velocity, sp.ra);
      const double vrel = dot(c.normal, dv);
      sp.velocity_bias = vrel < -config_.restitution_threshold ? -c.restitution * vrel : 0.0;

      const auto& mp = c.manifold.points[p];
      const Vec2 impulse = mp.normal_impulse * c.normal + mp.tangent_impulse * tangent;
      ba.velocity -= ba.inv_mass * impulse;
      ba.angular_velocity -= ba.inv_inertia * cross(sp.ra, impulse);
      bb.velocity += bb.inv_mass * impulse;
      bb.angular_velocity += bb.inv_inertia * cross(sp.rb, impulse);
    }
  }

  for (int iter = 0; iter < config_.velocity_iterations; ++iter) {
    for (auto& c : contacts_) {
      Body& ba = bodies_[c.a];
      Body& bb = bodies_[c.b];
      const Vec2 tangent = cross(c.normal, 1.0);
      for (int p = 0; p < c.manifold.point_count; ++p) {
        auto& sp = c.solver[p];
        auto& mp = c.manifold.points[p];
        const Vec2 dv = bb.velocity + cross(bb.angular_velocity, sp.rb) - ba.velocity -
                        cross(ba.angular_velocity, sp.ra);
        const double max_friction = c.friction * mp.normal_impulse;
        const double lambda = -sp.tangent_mass * dot(dv, tangent);
        const double total = std::clamp(mp.tangent_impulse + lambda, -max_friction, max_friction);
        const Vec2 impulse = (total - mp.tangent_impulse) * tangent;
        mp.tangent_impulse = total;
        ba.velocity -= ba.inv_mass * impulse;
        ba.angular_velocity -= ba.inv_inertia * cross(sp.ra, impulse);
        bb.velocity += bb.inv_mass * impulse;
        bb.angular_velocity += bb.inv_inertia * cross(sp.rb, impulse);
      }
      for (int p = 0; p < c.manifold.point_count; ++p) {
        auto& sp = c.solver[p];
        auto& mp = c.manifold.points[p];
        const Vec2 dv = bb.velocity + cross(bb.angular_velocity, sp.rb) - ba.velocity -
                        cross(ba.angular_velocity, sp.ra);
        const double lambda = -sp.normal_mass * (dot(dv, c.normal) - sp.velocity_bias);
        const double total = std::max(mp.normal_impulse + lambda, 0.0);
        const Vec2 impulse = (total - mp.normal_impulse) * c.normal;
        mp.normal_impulse = total;
        ba.velocity -= ba.inv_mass * impulse;
        ba.angular_velocity -= ba.inv_inertia * cross(sp.ra, impulse);
        bb.velocity += bb.inv_mass * impulse;
        bb.angular_velocity += bb.inv_inertia * cross(sp.rb, impulse);
      }
    }
  }

  for (auto& body : bodies_) {
    if (body.is_static) continue;
    body.position += dt * body.velocity;
    body.angle += dt * body.angular_velocity;
  }
}

void World::solve_positions() {
  for (int iter = 0; iter < config_.position_iterations; ++iter) {
    for (auto& c : contacts_) {
      Body& ba = bodies_[c.a];
      Body& bb = bodies_[c.b];
      for (int p = 0; p < c.manifold.point_count; ++p) {
        const PositionSample ps = position_sample(c.manifold, p, ba.shapes[c.shape_a], ba.xf(),
                                                  bb.shapes[c.shape_b], bb.xf());
        const Vec2 ra = ps.point - ba.position;
        const Vec2 rb = ps.point - bb.position;
        const double correction = std::clamp(
            config_.baumgarte * (ps.separation + kLinearSlop), -config_.max_correction, 0.0);
        const double rna = cross(ra, ps.normal);
        const double rnb = cross(rb, ps.normal);
        const double k = ba.inv_mass + bb.inv_mass + ba.inv_inertia * rna * rna +
                         bb.inv_inertia * rnb * rnb;
        const double lambda = k > 0.0 ? -correction / k : 0.0;
        const Vec2 impulse = lambda * ps.normal;
        ba.position -= ba.inv_mass * impulse;
        ba.angle -= ba.inv_inertia * cross(ra, impulse);
        bb.position += bb.inv_mass * impulse;
        bb.angle += bb.inv_inertia * cross(rb, impulse);
      }
    }
  }
}

void World::check_finite() const {
  for (const auto& b : bodies_) {
    if (b.is_static) continue;
    const bool finite = std::isfinite(b.position.x) && std::isfinite(b.position.y) &&
                        std::isfinite(b.angle) && std::isfinite(b.velocity.x) &&
                        std::isfinite(b.velocity.y) && std::isfinite(b.angular_velocity);
    if (!finite) {
      fail(ErrorKind::simulation, "non-finite state for object " + std::to_string(b.id));
    }
    if (length(b.velocity) > config_.max_speed) {
      fail(ErrorKind::simulation, "object " + std::to_string(b.id) + " exceeded " +
                                      std::to_string(config_.max_speed) + " m/s");
    }
  }
}

void World::update_sleep(double dt) {
  if (!config_.allow_sleep) return;
  bool calm = true;
  for (const auto& b : bodies_) {
    if (b.is_static) continue;
    if (length(b.velocity) >= config_.sleep_linear ||
        std::abs(b.angular_velocity) >= config_.sleep_angular) {
      calm = false;
      break;
    }
  }
  sleep_timer_ = calm ? sleep_timer_ + dt : 0.0;
  if (sleep_timer_ >= config_.sleep_time - 1e-12) {
    frozen_ = true;
    for (auto& b : bodies_) {
      b.velocity = {};
      b.angular_velocity = 0.0;
    }
  }
}

void World::step(double dt) {
  if (std::abs(dt - config_.dt) > 1e-12) {
    fail(ErrorKind::argument, "step dt must equal the configured fixed timestep");
  }
  if (frozen_) {
    for (auto& rec : last_contacts_) rec.normal_speed = 0.0;
    return;
  }
  update_contacts();
  record_contacts(false);
  solve_velocities(dt);
  solve_positions();
  check_finite();
  // impulses of this step belong to the geometry it started from
  for (auto& rec : last_contacts_) rec.normal_impulse = 0.0;
  for (const auto& c : contacts_) {
    const int lo = std::min(bodies_[c.a].id, bodies_[c.b].id);
    const int hi = std::max(bodies_[c.a].id, bodies_[c.b].id);
    for (auto& rec : last_contacts_) {
      if (rec.a == lo && rec.b == hi) {
        for (int p = 0; p < c.manifold.point_count; ++p) {
          rec.normal_impulse += c.manifold.points[p].normal_impulse;
        }
      }
    }
  }
  update_sleep(dt);
}

std::vector<ContactRecord> World::probe_contacts() {
  if (!frozen_) {
    update_contacts();
    record_contacts(true);
  }
  return last_contacts_;
}

double World::min_separation() {
  update_contacts();
  double lowest = 0.0;
  for (const auto& c : contacts_) {
    const Body& ba = bodies_[c.a];
    const Body& bb = bodies_[c.b];
    const WorldManifold wm = world_manifold(c.manifold, ba.shapes[c.shape_a], ba.xf(),
                                            bb.shapes[c.shape_b], bb.xf());
    for (int p = 0; p < c.manifold.point_count; ++p) lowest = std::min(lowest, wm.separations[p]);
  }
  return lowest;
}

std::vector<BodyState> World::state() const {
  std::vector<BodyState> out;
  out.reserve(dynamic_order_.size());
  for (std::size_t i : dynamic_order_) {
    const Body& b = bodies_[i];
    out.push_back({b.id, b.position, b.angle, b.velocity, b.angular_velocity});
  }
  return out;
}

void validate_scene(const SceneSpec& scene) {
  std::vector<int> ids;
  for (const auto& s : scene.statics) {
    ids.push_back(s.id);
    if (s.polygons.empty()) {
      fail(ErrorKind::validation, "static element " + std::to_string(s.id) + " has no geometry");
    }
    for (const auto& poly : s.polygons) {
      if (!is_convex_ccw(poly)) {
        fail(ErrorKind::validation,
             "static element " + std::to_string(s.id) + " has a non-convex polygon");
      }
    }
  }
  for (const auto& d : scene.dynamics) {
    ids.push_back(d.id);
    const bool finite = std::isfinite(d.position.x) && std::isfinite(d.position.y) &&
                        std::isfinite(d.angle) && std::isfinite(d.linear_velocity.x) &&
                        std::isfinite(d.linear_velocity.y) && std::isfinite(d.angular_velocity);
    if (!finite) fail(ErrorKind::validation, "object " + std::to_string(d.id) + " is not finite");
    if (!(d.mass > 0.0)) {
      fail(ErrorKind::validation, "object " + std::to_string(d.id) + " has non-positive mass");
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail(ErrorKind::validation, "scene " + scene.scene_id + " has duplicate object ids");
  }
  World probe(scene, SimConfig{});
  if (probe.min_separation() < -kLinearSlop) {
    fail(ErrorKind::validation, "scene " + scene.scene_id + " starts with interpenetration");
  }
}

SimulationTrace simulate(const SceneSpec& scene, const SimConfig& config) {
  validate_scene(scene);
  SimulationTrace trace;
  trace.scene_id = scene.scene_id;
  trace.dt = config.dt;
  trace.tick_count = config.tick_count();
  if (trace.tick_count < 1) fail(ErrorKind::argument, "duration shorter than one tick");
  trace.states.reserve(trace.tick_count);
  trace.contacts.reserve(trace.tick_count);

  World world(scene, config);
  for (int tick = 0; tick < trace.tick_count; ++tick) {
    trace.states.push_back(world.state());
    if (tick + 1 < trace.tick_count) {
      world.step(config.dt);
      trace.contacts.push_back(world.last_contacts());
    } else {
      trace.contacts.push_back(world.probe_contacts());
    }
  }
  return trace;
}

}  // namespace craft::physics

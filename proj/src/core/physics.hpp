#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collision.hpp"
#include "scene.hpp"

namespace craft::physics {

inline constexpr const char* kEngineVersion = "craft-physics/1.0";

struct SimConfig {
  double dt = 1.0 / 120.0;
  double duration = 10.0;
  Vec2 gravity{0.0, -9.8};
  int velocity_iterations = 8;
  int position_iterations = 3;
  double max_speed = 100.0;        // blow-up guard, m/s
  double restitution_threshold = 1.0;
  double baumgarte = 0.2;
  double max_correction = 0.2;
  double angular_damping = 2.0;  // 1/s; stands in for rolling resistance
  // Once every dynamic body stays below these for sleep_time, the world freezes.
  bool allow_sleep = true;
  double sleep_linear = 0.01;
  double sleep_angular = 0.035;
  double sleep_time = 0.5;

  int tick_count() const;
};

struct BodyState {
  int id = 0;
  Vec2 position;
  double angle = 0.0;
  Vec2 linear_velocity;
  double angular_velocity = 0.0;

  friend bool operator==(const BodyState&, const BodyState&) = default;
};

/// One touching pair at one tick; a < b, normal points from a to b.
struct ContactRecord {
  int a = 0;
  int b = 0;
  Vec2 normal;
  double normal_speed = 0.0;  // approach speed along the normal, > 0 when closing
  double normal_impulse = 0.0;

  friend bool operator==(const ContactRecord&, const ContactRecord&) = default;
};

struct SimulationTrace {
  std::string scene_id;
  std::string engine_version = kEngineVersion;
  int tick_count = 0;
  double dt = 0.0;
  std::optional<int> removed_object_id;
  std::vector<std::vector<BodyState>> states;        // [tick][dynamic], scene order
  std::vector<std::vector<ContactRecord>> contacts;  // [tick]

  const std::vector<BodyState>& initial_state() const { return states.front(); }
  const std::vector<BodyState>& final_state() const { return states.back(); }
  double duration() const { return tick_count * dt; }

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

class World {
 public:
  World(const SceneSpec& scene, const SimConfig& config);

  /// Advances one fixed step; dt must equal the configured step.
  void step(double dt);
  /// Contact records for the current geometry, without advancing.
  std::vector<ContactRecord> probe_contacts();

  std::vector<BodyState> state() const;
  const std::vector<ContactRecord>& last_contacts() const { return last_contacts_; }
  /// True once the whole world has settled and further steps are no-ops.
  bool frozen() const { return frozen_; }
  /// Smallest separation among all current contacts (0 when none).
  double min_separation();

 private:
  struct Body;
  struct Contact;

  void update_contacts();
  void record_contacts(bool include_impulse);
  void solve_velocities(double dt);
  void solve_positions();
  void check_finite() const;
  void update_sleep(double dt);

  SimConfig config_;
  std::vector<Body> bodies_;  // statics first, then dynamics (scene order)
  std::vector<std::size_t> dynamic_order_;
  std::vector<Contact> contacts_;
  std::vector<ContactRecord> last_contacts_;
  double sleep_timer_ = 0.0;
  bool frozen_ = false;

 public:
  ~World();
  World(World&&) noexcept;
  World& operator=(World&&) noexcept;
};

/// Rejects duplicate ids, non-finite or massless objects and initial interpenetration.
void validate_scene(const SceneSpec& scene);

SimulationTrace simulate(const SceneSpec& scene, const SimConfig& config = {});

}  // namespace craft::physics

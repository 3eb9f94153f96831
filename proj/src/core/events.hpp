#pragma once

#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "physics.hpp"

namespace craft {

enum class EventType { start, end, collision, touch_start, touch_end, enter_basket };

std::string_view name(EventType t);
std::optional<EventType> parse_event_type(std::string_view s);
/// Tie-break rank at equal ticks: Start < TouchStart < Collision < EnterBasket < TouchEnd < End.
int rank(EventType t);

struct Event {
  int event_id = 0;
  EventType type = EventType::start;
  int tick = 0;
  std::vector<int> participants;  // contact pairs are (min id, max id)

  bool involves(int object_id) const;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Deterministic event order: tick, type rank, participant ids.
bool event_less(const Event& a, const Event& b);
/// Same order ignoring event_id, usable for set semantics across traces.
bool same_event(const Event& a, const Event& b);

struct EventOptions {
  double collision_speed = 0.5;  // m/s relative normal approach speed
};

/// Events are returned sorted with event_id equal to the index.
std::vector<Event> extract_events(const physics::SimulationTrace& trace, const SceneSpec& scene,
                                  const EventOptions& options = {});

struct CausalGraph {
  std::vector<Event> events;
  std::vector<std::pair<int, int>> edges;  // (cause event_id, effect event_id)
};

/// Links each event to the latest earlier event of every participant (Start when none)
/// and each participant's last event to End.
CausalGraph build_causal_graph(std::vector<Event> events);

inline constexpr double kMotionEpsilon = 1e-3;  // m/s

using IntentionTable = std::map<int, bool>;

/// intended <=> |initial linear velocity| > kMotionEpsilon
IntentionTable intentions(const physics::SimulationTrace& trace);

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CausalGraph& g);
CausalGraph graph_from_json(const nlohmann::json& j);

}  // namespace craft

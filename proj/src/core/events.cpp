#include "events.hpp"

#include <algorithm>
#include <set>

#include "error.hpp"

namespace craft {

std::string_view name(EventType t) {
  switch (t) {
    case EventType::start: return "Start";
    case EventType::end: return "End";
    case EventType::collision: return "Collision";
    case EventType::touch_start: return "TouchStart";
    case EventType::touch_end: return "TouchEnd";
    case EventType::enter_basket: return "EnterBasket";
  }
  return "?";
}

std::optional<EventType> parse_event_type(std::string_view s) {
  for (auto t : {EventType::start, EventType::end, EventType::collision, EventType::touch_start,
                 EventType::touch_end, EventType::enter_basket}) {
    if (name(t) == s) return t;
  }
  return std::nullopt;
}

int rank(EventType t) {
  switch (t) {
    case EventType::start: return 0;
    case EventType::touch_start: return 1;
    case EventType::collision: return 2;
    case EventType::enter_basket: return 3;
    case EventType::touch_end: return 4;
    case EventType::end: return 5;
  }
  return 6;
}

bool Event::involves(int object_id) const {
  return std::find(participants.begin(), participants.end(), object_id) != participants.end();
}

bool event_less(const Event& a, const Event& b) {
  if (a.tick != b.tick) return a.tick < b.tick;
  if (rank(a.type) != rank(b.type)) return rank(a.type) < rank(b.type);
  return a.participants < b.participants;
}

bool same_event(const Event& a, const Event& b) {
  return a.tick == b.tick && a.type == b.type && a.participants == b.participants;
}

std::vector<Event> extract_events(const physics::SimulationTrace& trace, const SceneSpec& scene,
                                  const EventOptions& options) {
  std::vector<Event> events;
  events.push_back({0, EventType::start, 0, {}});

  std::vector<const StaticElement*> baskets;
  for (const auto& s : scene.statics) {
    if (s.kind == StaticKind::basket && s.interior) baskets.push_back(&s);
  }
  auto in_basket = [&](Vec2 p) {
    return std::any_of(baskets.begin(), baskets.end(),
                       [&](const StaticElement* b) { return b->interior->contains(p); });
  };

  std::set<std::pair<int, int>> touching;
  std::map<int, bool> was_inside;
  std::set<int> entered;
  for (int tick = 0; tick < trace.tick_count; ++tick) {
    std::set<std::pair<int, int>> now;
    for (const auto& c : trace.contacts[tick]) {
      const std::pair<int, int> key{c.a, c.b};
      now.insert(key);
      if (!touching.contains(key)) {
        events.push_back({0, EventType::touch_start, tick, {c.a, c.b}});
        if (c.normal_speed > options.collision_speed) {
          events.push_back({0, EventType::collision, tick, {c.a, c.b}});
        }
      }
    }
    for (const auto& key : touching) {
      if (!now.contains(key)) events.push_back({0, EventType::touch_end, tick, {key.first, key.second}});
    }
    touching = std::move(now);

    for (const auto& st : trace.states[tick]) {
      const bool inside = in_basket(st.position);
      if (tick > 0 && inside && !was_inside[st.id] && !entered.contains(st.id)) {
        entered.insert(st.id);
        events.push_back({0, EventType::enter_basket, tick, {st.id}});
      }
      was_inside[st.id] = inside;
    }
  }
  events.push_back({0, EventType::end, std::max(0, trace.tick_count - 1), {}});

  std::stable_sort(events.begin(), events.end(), event_less);
  for (std::size_t i = 0; i < events.size(); ++i) events[i].event_id = static_cast<int>(i);
  return events;
}

CausalGraph build_causal_graph(std::vector<Event> events) {
  std::stable_sort(events.begin(), events.end(), event_less);
  CausalGraph g;
  g.events = std::move(events);
  if (g.events.empty()) return g;

  int start_id = -1;
  int end_id = -1;
  for (const auto& e : g.events) {
    if (e.type == EventType::start) start_id = e.event_id;
    if (e.type == EventType::end) end_id = e.event_id;
  }
  if (start_id < 0 || end_id < 0) fail(ErrorKind::argument, "event list lacks Start or End");

  std::set<std::pair<int, int>> edges;
  std::map<int, int> latest;  // object -> latest event id
  for (const auto& e : g.events) {
    if (e.type == EventType::start || e.type == EventType::end) continue;
    for (int o : e.participants) {
      auto it = latest.find(o);
      edges.insert({it == latest.end() ? start_id : it->second, e.event_id});
      latest[o] = e.event_id;
    }
  }
  for (const auto& [object, last] : latest) edges.insert({last, end_id});
  if (edges.empty()) edges.insert({start_id, end_id});
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

IntentionTable intentions(const physics::SimulationTrace& trace) {
  IntentionTable table;
  if (trace.states.empty()) return table;
  for (const auto& st : trace.initial_state()) {
    table[st.id] = length(st.linear_velocity) > kMotionEpsilon;
  }
  return table;
}

nlohmann::json to_json(const Event& e) {
  return {{"event_id", e.event_id},
          {"type", name(e.type)},
          {"tick", e.tick},
          {"participants", e.participants}};
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  e.event_id = j.at("event_id").get<int>();
  const auto type = parse_event_type(j.at("type").get<std::string>());
  if (!type) fail(ErrorKind::parse, "unknown event type " + j.at("type").dump());
  e.type = *type;
  e.tick = j.at("tick").get<int>();
  e.participants = j.at("participants").get<std::vector<int>>();
  return e;
}

nlohmann::json to_json(const CausalGraph& g) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : g.events) events.push_back(to_json(e));
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [from, to] : g.edges) edges.push_back({from, to});
  return {{"events", std::move(events)}, {"edges", std::move(edges)}};
}

CausalGraph graph_from_json(const nlohmann::json& j) {
  CausalGraph g;
  for (const auto& e : j.at("events")) g.events.push_back(event_from_json(e));
  for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

}  // namespace craft

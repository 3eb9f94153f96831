#include <doctest.h>

#include "error.hpp"
#include "events.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace craft;
using namespace craft::testing;

namespace {

Event ev(EventType t, int tick, std::vector<int> who) { return {0, t, tick, std::move(who)}; }

std::vector<Event> numbered(std::vector<Event> events) {
  std::stable_sort(events.begin(), events.end(), event_less);
  for (std::size_t i = 0; i < events.size(); ++i) events[i].event_id = static_cast<int>(i);
  return events;
}

int find(const std::vector<Event>& events, EventType t, std::vector<int> who) {
  for (const auto& e : events) {
    if (e.type == t && e.participants == who) return e.event_id;
  }
  return -1;
}

// Structural checks every extracted event list and graph must pass.
void check_well_formed(const std::vector<Event>& events, int tick_count) {
  REQUIRE(events.size() >= 2);
  CHECK(count_type(events, EventType::start) == 1);
  CHECK(count_type(events, EventType::end) == 1);
  CHECK(events.front().type == EventType::start);
  CHECK(events.front().tick == 0);
  CHECK(events.back().type == EventType::end);
  CHECK(events.back().tick == tick_count - 1);
  int open = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    CHECK(e.event_id == static_cast<int>(i));
    if (i > 0) CHECK_FALSE(event_less(e, events[i - 1]));
    if (e.type == EventType::collision) {
      // a touch start for the same pair at or before this tick
      const bool preceded = std::any_of(events.begin(), events.begin() + i, [&](const Event& p) {
        return p.type == EventType::touch_start && p.participants == e.participants && p.tick <= e.tick;
      });
      CHECK(preceded);
    }
    if (e.type == EventType::touch_start) ++open;
    if (e.type == EventType::touch_end) --open;
    CHECK(open >= 0);
    if (e.participants.size() == 2) CHECK(e.participants[0] < e.participants[1]);
  }

  const CausalGraph g = build_causal_graph(events);
  for (const auto& [from, to] : g.edges) {
    const Event& a = g.events[from];
    const Event& b = g.events[to];
    CHECK(from < to);
    CHECK(a.tick <= b.tick);
    const bool shared = std::any_of(a.participants.begin(), a.participants.end(),
                                    [&](int o) { return b.involves(o); });
    CHECK((shared || a.type == EventType::start || b.type == EventType::end));
  }
}

}  // namespace

TEST_CASE("a static-only scene has just Start and End") {
  const Run r = run(arena());
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].type == EventType::start);
  CHECK(r.events[1].type == EventType::end);
  CHECK(r.events[1].tick == 1199);
  const CausalGraph g = build_causal_graph(r.events);
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("a ball dropped from one metre touches and collides with the ground") {
  SceneSpec s = arena();
  const int ball = add_dynamic(s, Shape::circle, Size::small, Color::red, {5.0, 1.35});
  const Run r = run(s);
  check_well_formed(r.events, r.trace.tick_count);

  // first tick the pair shows up in the raw contacts
  int first = -1;
  for (int k = 0; k < r.trace.tick_count && first < 0; ++k) {
    for (const auto& c : r.trace.contacts[k]) {
      if (c.a == 1 && c.b == ball) first = k;
    }
  }
  REQUIRE(first > 0);
  const int touch = find(r.events, EventType::touch_start, {1, ball});
  const int hit = find(r.events, EventType::collision, {1, ball});
  REQUIRE(touch > 0);
  REQUIRE(hit > 0);
  CHECK(r.events[touch].tick == first);
  CHECK(r.events[hit].tick == first);
  CHECK(touch < hit);
  CHECK(hit < static_cast<int>(r.events.size()) - 1);
  // about sqrt(2 h / g) after release
  CHECK(first * r.trace.dt == doctest::Approx(std::sqrt(2.0 / 9.8)).epsilon(0.05));
}

TEST_CASE("gentle rolling onto a platform is a touch but not a collision") {
  SceneSpec s = arena();
  const int a = add_bar(s, StaticKind::platform, {3.0, 1.0}, 2.0);
  const int b = add_bar(s, StaticKind::platform, {5.0, 1.0}, 2.0);
  const int ball = add_dynamic(s, Shape::circle, Size::small, Color::blue, {3.3, 1.1 + 0.35}, {1.2, 0.0});
  const Run r = run(s, 4.0);
  check_well_formed(r.events, r.trace.tick_count);
  CHECK(find(r.events, EventType::touch_start, {a, ball}) >= 0);
  CHECK(find(r.events, EventType::touch_start, {b, ball}) >= 0);
  CHECK(find(r.events, EventType::collision, {b, ball}) < 0);
  CHECK(find(r.events, EventType::collision, {a, ball}) < 0);
}

TEST_CASE("basket entry is reported once at the crossing tick") {
  SceneSpec s = arena();
  add_basket(s, 5.0, 1.6, 0.8);
  const int ball = add_dynamic(s, Shape::circle, Size::small, Color::green, {5.0, 3.0});
  const int cube = add_dynamic(s, Shape::cube, Size::small, Color::red, {2.0, 0.35});
  const Run r = run(s);
  check_well_formed(r.events, r.trace.tick_count);
  const oracle::Facts f = oracle::scan(s, r.trace);
  REQUIRE(f.entry.count(ball));
  CHECK_FALSE(f.entry.count(cube));
  CHECK(count_type(r.events, EventType::enter_basket) == 1);
  const int e = find(r.events, EventType::enter_basket, {ball});
  REQUIRE(e >= 0);
  CHECK(r.events[e].tick == f.entry.at(ball));
}

TEST_CASE("extracted collisions match a raw contact scan") {
  SceneSpec s = arena();
  add_basket(s, 7.5, 1.6, 0.8);
  add_bar(s, StaticKind::ramp, {3.0, 2.5}, 3.0, -0.3);
  add_dynamic(s, Shape::cube, Size::small, Color::red, {2.0, 3.6});
  add_dynamic(s, Shape::circle, Size::large, Color::blue, {5.5, 0.7}, {-2.0, 0.0});
  add_dynamic(s, Shape::triangle, Size::small, Color::yellow, {7.5, 4.0}, {0.0, -1.0});
  const Run r = run(s);
  check_well_formed(r.events, r.trace.tick_count);
  const oracle::Facts f = oracle::scan(s, r.trace);
  std::vector<std::tuple<int, int, int>> got, want;
  for (const auto& e : r.events) {
    if (e.type == EventType::collision) got.emplace_back(e.tick, e.participants[0], e.participants[1]);
  }
  for (const auto& h : f.hits) want.emplace_back(h.tick, h.a, h.b);
  CHECK(got == want);
  CHECK_FALSE(want.empty());
}

TEST_CASE("graph edges follow each object's previous event") {
  SUBCASE("one object: collision then basket entry") {
    const auto events = numbered({ev(EventType::start, 0, {}), ev(EventType::collision, 10, {1, 100}),
                                  ev(EventType::enter_basket, 30, {100}), ev(EventType::end, 1199, {})});
    const CausalGraph g = build_causal_graph(events);
    // Start->c1, c1->b1, b1->End, plus the ground's own last event c1->End
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {1, 3}, {2, 3}});
  }
  SUBCASE("two objects that never meet form disjoint chains") {
    const auto events = numbered({ev(EventType::start, 0, {}), ev(EventType::enter_basket, 5, {100}),
                                  ev(EventType::enter_basket, 7, {101}), ev(EventType::end, 99, {})});
    const CausalGraph g = build_causal_graph(events);
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  }
  SUBCASE("equal ticks order by type rank then ids") {
    const auto events = numbered({ev(EventType::end, 9, {}), ev(EventType::touch_end, 4, {1, 100}),
                                  ev(EventType::collision, 4, {1, 101}), ev(EventType::touch_start, 4, {1, 101}),
                                  ev(EventType::enter_basket, 4, {100}), ev(EventType::start, 0, {})});
    std::vector<EventType> order;
    for (const auto& e : events) order.push_back(e.type);
    CHECK(order == std::vector<EventType>{EventType::start, EventType::touch_start, EventType::collision,
                                          EventType::enter_basket, EventType::touch_end, EventType::end});
  }
  SUBCASE("missing Start is rejected") {
    CHECK_THROWS_AS(build_causal_graph(numbered({ev(EventType::end, 9, {})})), Error);
  }
}

TEST_CASE("graphs round-trip through JSON") {
  SceneSpec s = arena();
  add_dynamic(s, Shape::circle, Size::small, Color::red, {3.0, 2.0}, {2.0, 0.0});
  add_dynamic(s, Shape::cube, Size::small, Color::blue, {6.0, 0.35});
  const Run r = run(s);
  const CausalGraph g = build_causal_graph(r.events);
  const CausalGraph back = graph_from_json(nlohmann::json::parse(to_json(g).dump()));
  CHECK(back.events == g.events);
  CHECK(back.edges == g.edges);
  CHECK_THROWS_AS(event_from_json({{"event_id", 0}, {"type", "Bounce"}, {"tick", 0}, {"participants", {}}}), Error);
}

TEST_CASE("intention follows the initial speed") {
  SceneSpec s = arena();
  const int still = add_dynamic(s, Shape::cube, Size::small, Color::red, {2.0, 0.35});
  const int pushed = add_dynamic(s, Shape::cube, Size::small, Color::blue, {5.0, 0.35}, {3.0, 0.0});
  const int crawl = add_dynamic(s, Shape::cube, Size::small, Color::green, {8.0, 0.35}, {1e-4, 0.0});
  const auto table = intentions(physics::simulate(s, sim_config(0.5)));
  CHECK_FALSE(table.at(still));
  CHECK(table.at(pushed));
  CHECK_FALSE(table.at(crawl));
}

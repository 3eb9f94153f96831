#include <doctest.h>

#include <thread>

#include "counterfactual.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace craft;
using namespace craft::testing;

TEST_CASE("the relation truth table") {
  CHECK(classify(true, false, false) == Relation::cause);
  CHECK(classify(true, false, true) == Relation::enable);
  CHECK(classify(false, true, true) == Relation::prevent);
  CHECK(classify(true, true, false) == Relation::none);
  CHECK(classify(true, true, true) == Relation::none);
  CHECK(classify(false, true, false) == Relation::none);
  CHECK(classify(false, false, false) == Relation::none);
  CHECK(classify(false, false, true) == Relation::none);

  // each relation holds for exactly the rows its formula names
  for (int bits = 0; bits < 8; ++bits) {
    const bool a = bits & 1, c = bits & 2, i = bits & 4;
    const int held = (a && !c && !i) + (a && !c && i) + (!a && c && i);
    CHECK(held <= 1);
    CHECK((classify(a, c, i) != Relation::none) == (held == 1));
  }
}

TEST_CASE("removing the striker of a billiard shot") {
  SceneSpec s = arena("billiard");
  const int striker = add_dynamic(s, Shape::circle, Size::small, Color::red, {2.0, 0.35}, {4.0, 0.0});
  const int target = add_dynamic(s, Shape::circle, Size::small, Color::blue, {5.0, 0.35});
  const Run base = run(s);
  const auto hit = std::find_if(base.events.begin(), base.events.end(), [&](const Event& e) {
    return e.type == EventType::collision && e.involves(striker) && e.involves(target);
  });
  CHECK(hit != base.events.end());

  const Variation v = counterfact_trace(s, striker);
  CHECK(v.removed_id == striker);
  REQUIRE(v.trace);
  CHECK(v.trace->removed_object_id == striker);
  REQUIRE(v.trace->initial_state().size() == 1);
  CHECK(v.trace->initial_state()[0].id == target);
  for (const auto& e : v.graph.events) {
    CHECK(e.type != EventType::collision);
    CHECK_FALSE(e.involves(striker));
  }
  CHECK_FALSE(counterfact_trace(s, striker, {}, false).trace.has_value());
}

TEST_CASE("removing an isolated object leaves the others untouched") {
  SceneSpec s = arena();
  const int a = add_dynamic(s, Shape::cube, Size::small, Color::red, {2.0, 2.0});
  add_dynamic(s, Shape::circle, Size::small, Color::blue, {8.0, 3.0});
  const Run base = run(s);
  const Variation v = counterfact_trace(s, 101);
  std::vector<Event> mine, theirs;
  for (const auto& e : base.events) {
    if (e.involves(a)) mine.push_back(e);
  }
  for (const auto& e : v.graph.events) {
    if (e.involves(a)) theirs.push_back(e);
  }
  REQUIRE(mine.size() == theirs.size());
  for (std::size_t i = 0; i < mine.size(); ++i) CHECK(same_event(mine[i], theirs[i]));
}

TEST_CASE("removing the only moving object leaves resting contacts") {
  SceneSpec s = arena();
  add_dynamic(s, Shape::cube, Size::small, Color::red, {5.0, 0.35});
  const int mover = add_dynamic(s, Shape::circle, Size::small, Color::blue, {2.0, 2.0}, {3.0, 0.0});
  const Variation v = counterfact_trace(s, mover);
  for (const auto& e : v.graph.events) {
    const bool allowed = e.type == EventType::start || e.type == EventType::end ||
                         (e.type == EventType::touch_start && e.tick == 0);
    CHECK(allowed);
  }
}

TEST_CASE("removal arguments are checked") {
  SceneSpec s = arena();
  const int a = add_dynamic(s, Shape::cube, Size::small, Color::red, {5.0, 0.35});
  try {
    counterfact_trace(s, 1);
    FAIL("static removal accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::argument);
  }
  const Run r = run(s, 1.0);
  const Variation v = counterfact_trace(s, a, sim_config(1.0));
  CHECK_THROWS_AS(classify_relation(a, a, r.events, v, intentions(r.trace)), Error);
}

TEST_CASE("classify_relation reads basket outcomes") {
  // the striker knocks a resting ball off a shelf into the basket
  SceneSpec s = arena("shelf");
  add_basket(s, 5.5, 1.6, 0.8);
  add_bar(s, StaticKind::platform, {3.0, 2.0}, 3.0);
  const int striker = add_dynamic(s, Shape::circle, Size::small, Color::brown, {2.0, 2.45}, {6.0, 0.0});
  const int patient = add_dynamic(s, Shape::cube, Size::small, Color::yellow, {4.1, 2.45});
  const Run r = run(s);
  const Variation v = counterfact_trace(s, striker);
  const auto rel = classify_relation(striker, patient, r.events, v, intentions(r.trace));
  CHECK(achieves(r.events, patient));
  CHECK_FALSE(achieves(v.graph.events, patient));
  CHECK(rel.relation == Relation::cause);
  CHECK(rel.affector_id == striker);
  CHECK(rel.patient_id == patient);
}

TEST_CASE("the variation cache runs each simulation once under contention") {
  SceneSpec s = arena("cache");
  add_dynamic(s, Shape::circle, Size::small, Color::red, {2.0, 0.35}, {4.0, 0.0});
  add_dynamic(s, Shape::circle, Size::small, Color::blue, {5.0, 0.35});
  add_dynamic(s, Shape::cube, Size::small, Color::green, {8.0, 0.35});
  VariationCache cache(sim_config(3.0));
  std::vector<std::shared_ptr<const Variation>> got(8);
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] { got[t] = cache.get(s, 100 + t % 2); });
  }
  for (auto& th : pool) th.join();
  CHECK(cache.simulations() == 2);
  CHECK(cache.size() == 2);
  for (int t = 2; t < 8; ++t) CHECK(got[t].get() == got[t % 2].get());

  const VariationSet set = compute_variation_set(s, cache);
  CHECK(set.variations.size() == 3);
  CHECK(cache.simulations() == 3);
  CHECK(cache.entries().size() == 3);
  for (const auto& [id, v] : set.variations) CHECK(v->removed_id == id);
}

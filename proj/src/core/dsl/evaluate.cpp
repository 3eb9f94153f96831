#include "dsl/evaluate.hpp"

#include <algorithm>
#include <map>

#include "error.hpp"

namespace craft::dsl {

namespace {

void check_step(int step) {
  if (step != 0 && step != -1) {
    fail(ErrorKind::evaluation, "unsupported step index " + std::to_string(step) + "; expected 0 or -1");
  }
}

}  // namespace

const physics::BodyState* SimContext::state_at(int object_id, int step) const {
  check_step(step);
  const auto& states = step == 0 ? initial : final;
  for (const auto& s : states) {
    if (s.id == object_id) return &s;
  }
  return nullptr;
}

bool SimContext::is_dynamic(int object_id) const { return scene.find_dynamic(object_id) != nullptr; }

std::vector<int> SimContext::all_object_ids() const {
  std::vector<int> ids;
  for (const auto& s : scene.statics) ids.push_back(s.id);
  for (const auto& d : scene.dynamics) ids.push_back(d.id);
  return ids;
}

std::vector<int> SimContext::ids_of_kind(StaticKind kind) const {
  std::vector<int> ids;
  for (const auto& s : scene.statics) {
    if (s.kind == kind) ids.push_back(s.id);
  }
  return ids;
}

SimContext make_context(const SceneSpec& scene, const physics::SimulationTrace& trace,
                        std::vector<Event> events, std::shared_ptr<VariationCache> cache) {
  SimContext ctx;
  ctx.scene = scene;
  ctx.initial = trace.initial_state();
  ctx.final = trace.final_state();
  ctx.events = std::move(events);
  ctx.intentions = intentions(trace);
  if (cache) {
    auto shared_scene = std::make_shared<const SceneSpec>(scene);
    ctx.counterfactual = [cache, shared_scene](int removed) { return cache->get(*shared_scene, removed); };
  }
  return ctx;
}

namespace {

using Args = std::vector<Value>;
using Impl = Value (*)(const Args&, const SimContext&);

const ObjectSet& objects(const Value& v) { return std::get<ObjectSet>(v); }
const EventSet& events_of(const Value& v) { return std::get<EventSet>(v); }
const EventSetList& event_lists(const Value& v) { return std::get<EventSetList>(v); }
int object(const Value& v) { return std::get<ObjectRef>(v).id; }
const Event& event(const Value& v) { return std::get<Event>(v); }
int step_of(const Value& v) { return std::get<Integer>(v).value; }

template <class Pred>
ObjectSet filter_objects(const ObjectSet& in, Pred pred) {
  ObjectSet out;
  std::copy_if(in.ids.begin(), in.ids.end(), std::back_inserter(out.ids), pred);
  return out;
}

template <class Pred>
EventSet filter_events(const EventSet& in, Pred pred) {
  EventSet out;
  std::copy_if(in.items.begin(), in.items.end(), std::back_inserter(out.items), pred);
  return out;
}

template <class Fn>
EventSetList map_lists(const EventSetList& in, Fn fn) {
  EventSetList out;
  for (const auto& set : in.items) out.items.push_back(fn(set));
  return out;
}

bool involves_any(const Event& e, const std::vector<int>& ids) {
  return std::any_of(ids.begin(), ids.end(), [&](int id) { return e.involves(id); });
}

EventSet collisions(const EventSet& in) {
  return filter_events(in, [](const Event& e) { return e.type == EventType::collision; });
}

EventSet collide_kind(const EventSet& in, const SimContext& ctx, StaticKind kind) {
  const auto ids = ctx.ids_of_kind(kind);
  return filter_events(in, [&](const Event& e) { return e.type == EventType::collision && involves_any(e, ids); });
}

EventSet enter_basket(const EventSet& in) {
  return filter_events(in, [](const Event& e) { return e.type == EventType::enter_basket; });
}

ObjectSet objects_from_events(const EventSet& in) {
  std::vector<int> ids;
  for (const auto& e : in.items) ids.insert(ids.end(), e.participants.begin(), e.participants.end());
  return make_object_set(std::move(ids));
}

bool moving(const SimContext& ctx, int id, int step) {
  const physics::BodyState* s = ctx.state_at(id, step);
  return s && length(s->linear_velocity) > kMotionEpsilon;
}

Value counterfactual_events(const SimContext& ctx, int id) {
  if (!ctx.is_dynamic(id)) return Invalid{};
  if (!ctx.counterfactual) fail(ErrorKind::evaluation, "no counterfactual provider in context");
  return EventSet{ctx.counterfactual(id)->graph.events};
}

ObjectSet intersect(const ObjectSet& a, const ObjectSet& b) {
  ObjectSet out;
  std::set_intersection(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(out.ids));
  return out;
}

const std::map<std::string, Impl, std::less<>>& implementations() {
  static const std::map<std::string, Impl, std::less<>> table{
      {"SceneAtStart", [](const Args&, const SimContext& c) -> Value { return make_object_set(c.all_object_ids()); }},
      {"SceneAtEnd", [](const Args&, const SimContext& c) -> Value { return make_object_set(c.all_object_ids()); }},
      {"StartSceneStep", [](const Args&, const SimContext&) -> Value { return Integer{0}; }},
      {"EndSceneStep", [](const Args&, const SimContext&) -> Value { return Integer{-1}; }},
      {"Events", [](const Args&, const SimContext& c) -> Value { return EventSet{c.events}; }},

      {"QueryColor",
       [](const Args& a, const SimContext& c) -> Value {
         const DynamicObject* d = c.scene.find_dynamic(object(a[0]));
         if (!d) return Invalid{};
         return d->color;
       }},
      {"QueryShape",
       [](const Args& a, const SimContext& c) -> Value {
         const DynamicObject* d = c.scene.find_dynamic(object(a[0]));
         if (!d) return Invalid{};
         return d->shape;
       }},
      {"Count", [](const Args& a, const SimContext&) -> Value { return Integer{static_cast<int>(objects(a[0]).ids.size())}; }},
      {"Exist",
       [](const Args& a, const SimContext&) -> Value {
         if (const auto* s = std::get_if<ObjectSet>(&a[0])) return Bool{!s->ids.empty()};
         return Bool{!events_of(a[0]).items.empty()};
       }},
      {"AnyFalse",
       [](const Args& a, const SimContext&) -> Value {
         const auto& l = std::get<BoolList>(a[0]).items;
         return Bool{std::find(l.begin(), l.end(), false) != l.end()};
       }},
      {"AnyTrue",
       [](const Args& a, const SimContext&) -> Value {
         const auto& l = std::get<BoolList>(a[0]).items;
         return Bool{std::find(l.begin(), l.end(), true) != l.end()};
       }},
      {"IsBefore", [](const Args& a, const SimContext&) -> Value { return Bool{event(a[0]).tick < event(a[1]).tick}; }},
      {"IsAfter", [](const Args& a, const SimContext&) -> Value { return Bool{event(a[0]).tick > event(a[1]).tick}; }},

      {"FilterColor",
       [](const Args& a, const SimContext& c) -> Value {
         const Color want = std::get<Color>(a[1]);
         return filter_objects(objects(a[0]), [&](int id) {
           const auto* d = c.scene.find_dynamic(id);
           return d && d->color == want;
         });
       }},
      {"FilterShape",
       [](const Args& a, const SimContext& c) -> Value {
         const Shape want = std::get<Shape>(a[1]);
         return filter_objects(objects(a[0]), [&](int id) {
           const auto* d = c.scene.find_dynamic(id);
           return d && d->shape == want;
         });
       }},
      {"FilterSize",
       [](const Args& a, const SimContext& c) -> Value {
         const Size want = std::get<Size>(a[1]);
         return filter_objects(objects(a[0]), [&](int id) {
           const auto* d = c.scene.find_dynamic(id);
           return d && d->size == want;
         });
       }},
      {"FilterDynamic",
       [](const Args& a, const SimContext& c) -> Value {
         return filter_objects(objects(a[0]), [&](int id) { return c.is_dynamic(id); });
       }},
      {"FilterMoving",
       [](const Args& a, const SimContext& c) -> Value {
         const int step = step_of(a[1]);
         check_step(step);
         return filter_objects(objects(a[0]), [&](int id) { return moving(c, id, step); });
       }},
      {"FilterStationary",
       [](const Args& a, const SimContext& c) -> Value {
         const int step = step_of(a[1]);
         check_step(step);
         return filter_objects(objects(a[0]), [&](int id) { return !moving(c, id, step); });
       }},

      {"FilterEvents",
       [](const Args& a, const SimContext&) -> Value {
         const int id = object(a[1]);
         return filter_events(events_of(a[0]), [&](const Event& e) { return e.involves(id); });
       }},
      {"FilterCollision", [](const Args& a, const SimContext&) -> Value { return collisions(events_of(a[0])); }},
      {"FilterCollisionWithDynamics",
       [](const Args& a, const SimContext& c) -> Value {
         return filter_events(events_of(a[0]), [&](const Event& e) {
           return e.type == EventType::collision &&
                  std::all_of(e.participants.begin(), e.participants.end(), [&](int id) { return c.is_dynamic(id); });
         });
       }},
      {"FilterCollideGround",
       [](const Args& a, const SimContext& c) -> Value { return collide_kind(events_of(a[0]), c, StaticKind::ground); }},
      {"FilterCollideGroundList",
       [](const Args& a, const SimContext& c) -> Value {
         return map_lists(event_lists(a[0]), [&](const EventSet& s) { return collide_kind(s, c, StaticKind::ground); });
       }},
      {"FilterCollideBasket",
       [](const Args& a, const SimContext& c) -> Value { return collide_kind(events_of(a[0]), c, StaticKind::basket); }},
      {"FilterCollideBasketList",
       [](const Args& a, const SimContext& c) -> Value {
         return map_lists(event_lists(a[0]), [&](const EventSet& s) { return collide_kind(s, c, StaticKind::basket); });
       }},
      {"FilterEnterBasket", [](const Args& a, const SimContext&) -> Value { return enter_basket(events_of(a[0])); }},
      {"FilterEnterBasketList",
       [](const Args& a, const SimContext&) -> Value { return map_lists(event_lists(a[0]), enter_basket); }},
      {"FilterBefore",
       [](const Args& a, const SimContext&) -> Value {
         const int tick = event(a[1]).tick;
         return filter_events(events_of(a[0]), [&](const Event& e) { return e.tick < tick; });
       }},
      {"FilterAfter",
       [](const Args& a, const SimContext&) -> Value {
         const int tick = event(a[1]).tick;
         return filter_events(events_of(a[0]), [&](const Event& e) { return e.tick > tick; });
       }},
      {"FilterFirst",
       [](const Args& a, const SimContext&) -> Value {
         const auto& items = events_of(a[0]).items;
         if (items.empty()) return Invalid{};
         return *std::min_element(items.begin(), items.end(), event_less);
       }},
      {"FilterLast",
       [](const Args& a, const SimContext&) -> Value {
         const auto& items = events_of(a[0]).items;
         if (items.empty()) return Invalid{};
         return *std::max_element(items.begin(), items.end(), event_less);
       }},
      {"EventPartner",
       [](const Args& a, const SimContext&) -> Value {
         const Event& e = event(a[0]);
         const int id = object(a[1]);
         if (e.participants.size() != 2 || !e.involves(id)) return Invalid{};
         return ObjectRef{e.participants[0] == id ? e.participants[1] : e.participants[0]};
       }},
      {"FilterObjectsFromEvents", [](const Args& a, const SimContext&) -> Value { return objects_from_events(events_of(a[0])); }},
      {"FilterObjectsFromEventsList",
       [](const Args& a, const SimContext&) -> Value {
         ObjectSetList out;
         for (const auto& s : event_lists(a[0]).items) out.items.push_back(objects_from_events(s));
         return out;
       }},
      {"GetCounterfactEvents", [](const Args& a, const SimContext& c) -> Value { return counterfactual_events(c, object(a[0])); }},
      {"GetCounterfactEventsList",
       [](const Args& a, const SimContext& c) -> Value {
         EventSetList out;
         for (int id : objects(a[0]).ids) {
           Value v = counterfactual_events(c, id);
           if (is_invalid(v)) return Invalid{};
           out.items.push_back(std::get<EventSet>(std::move(v)));
         }
         return out;
       }},

      {"Unique",
       [](const Args& a, const SimContext&) -> Value {
         const auto& ids = objects(a[0]).ids;
         if (ids.size() != 1) return Invalid{};
         return ObjectRef{ids.front()};
       }},
      {"Intersect", [](const Args& a, const SimContext&) -> Value { return intersect(objects(a[0]), objects(a[1])); }},
      {"IntersectList",
       [](const Args& a, const SimContext&) -> Value {
         ObjectSetList out;
         for (const auto& s : std::get<ObjectSetList>(a[0]).items) out.items.push_back(intersect(s, objects(a[1])));
         return out;
       }},
      {"Difference",
       [](const Args& a, const SimContext&) -> Value {
         const auto& x = objects(a[0]).ids;
         const auto& y = objects(a[1]).ids;
         ObjectSet out;
         std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out.ids));
         return out;
       }},
      {"ExistList",
       [](const Args& a, const SimContext&) -> Value {
         BoolList out;
         if (const auto* l = std::get_if<ObjectSetList>(&a[0])) {
           for (const auto& s : l->items) out.items.push_back(!s.ids.empty());
         } else {
           for (const auto& s : event_lists(a[0]).items) out.items.push_back(!s.items.empty());
         }
         return out;
       }},
      {"AsList", [](const Args& a, const SimContext&) -> Value { return ObjectSet{{object(a[0])}}; }},
  };
  return table;
}

struct Evaluator {
  const SimContext& ctx;
  std::map<std::string, Value> env;

  Value eval(const Node& n, const std::string& path) {
    if (n.is_var()) return env.at(n.var);
    const std::string here = path + "/" + n.module;
    Args args;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      args.push_back(eval(n.children[i], here + "[" + std::to_string(i) + "]"));
    }
    const ModuleInfo* m = find_module(n.module);
    for (std::size_t i = 0; i < n.literals.size(); ++i) {
      const Type t = m->overloads.front().params[n.children.size() + i];
      auto v = parse_literal(t, n.literals[i]);
      if (!v) fail(ErrorKind::evaluation, "at " + here + ": bad literal \"" + n.literals[i] + "\"");
      args.push_back(std::move(*v));
    }
    if (std::any_of(args.begin(), args.end(), is_invalid)) return Invalid{};
    try {
      return apply_module(n.module, args, ctx);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::evaluation) fail(ErrorKind::evaluation, "at " + here + ": " + e.what());
      throw;
    }
  }
};

}  // namespace

Value apply_module(const std::string& module, const std::vector<Value>& args, const SimContext& ctx) {
  const auto& table = implementations();
  const auto it = table.find(module);
  if (it == table.end()) fail(ErrorKind::evaluation, "no implementation for module " + module);
  return it->second(args, ctx);
}

Value evaluate(const TypedProgram& program, const SimContext& ctx) {
  Evaluator ev{ctx, {}};
  for (const auto& b : program.program.bindings) ev.env[b.name] = ev.eval(b.value, "Var " + b.name);
  return ev.eval(program.program.root, "root");
}

Value evaluate(const Program& program, const SimContext& ctx) { return evaluate(typecheck(program), ctx); }

std::optional<std::string> answer(const Program& program, const SimContext& ctx) {
  return render_answer(evaluate(program, ctx));
}

}  // namespace craft::dsl

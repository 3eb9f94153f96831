#include "counterfactual.hpp"

#include <chrono>
#include <mutex>

#include "error.hpp"

namespace craft {

std::string_view name(Task t) {
  switch (t) {
    case Task::enter_basket: return "enter_basket";
  }
  return "?";
}

std::string_view name(Relation r) {
  switch (r) {
    case Relation::none: return "none";
    case Relation::cause: return "cause";
    case Relation::enable: return "enable";
    case Relation::prevent: return "prevent";
  }
  return "?";
}

Variation counterfact_trace(const SceneSpec& scene, int removed_id, const physics::SimConfig& config,
                            bool keep_trace, const EventOptions& events) {
  const SceneSpec reduced = scene.without(removed_id);
  physics::SimulationTrace trace = physics::simulate(reduced, config);
  trace.removed_object_id = removed_id;
  Variation v;
  v.removed_id = removed_id;
  v.graph = build_causal_graph(extract_events(trace, reduced, events));
  if (keep_trace) v.trace = std::move(trace);
  return v;
}

VariationCache::VariationCache(physics::SimConfig config, bool keep_traces, EventOptions events)
    : config_(config), keep_traces_(keep_traces), events_(events) {}

std::shared_ptr<const Variation> VariationCache::get(const SceneSpec& scene, int removed_id) {
  Key key{scene.scene_id, removed_id, physics::kEngineVersion};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      auto future = it->second;
      lock.unlock();
      return future.get();
    }
  }
  std::promise<std::shared_ptr<const Variation>> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      auto future = it->second;
      lock.unlock();
      return future.get();
    }
    entries_.emplace(key, promise.get_future().share());
    ++simulations_;
  }
  try {
    auto v = std::make_shared<const Variation>(
        counterfact_trace(scene, removed_id, config_, keep_traces_, events_));
    promise.set_value(v);
    return v;
  } catch (...) {
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::size_t VariationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<std::shared_ptr<const Variation>> VariationCache::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<std::shared_ptr<const Variation>> out;
  for (const auto& [key, future] : entries_) {
    if (future.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
    try {
      out.push_back(future.get());
    } catch (const Error&) {
      // failed simulations are not listed
    }
  }
  return out;
}

std::size_t VariationCache::simulations() const {
  std::shared_lock lock(mutex_);
  return simulations_;
}

VariationSet compute_variation_set(const SceneSpec& scene, VariationCache& cache) {
  VariationSet set;
  set.scene_id = scene.scene_id;
  for (const auto& d : scene.dynamics) set.variations.emplace(d.id, cache.get(scene, d.id));
  return set;
}

bool achieves(const std::vector<Event>& events, int object_id, Task task) {
  switch (task) {
    case Task::enter_basket:
      for (const auto& e : events) {
        if (e.type == EventType::enter_basket && e.involves(object_id)) return true;
      }
      return false;
  }
  return false;
}

Relation classify(bool actual, bool counterfactual, bool intended) {
  if (actual && !counterfactual) return intended ? Relation::enable : Relation::cause;
  if (!actual && counterfactual && intended) return Relation::prevent;
  return Relation::none;
}

CausalRelation classify_relation(int affector_id, int patient_id, const std::vector<Event>& base,
                                 const Variation& without_affector, const IntentionTable& intents,
                                 Task task) {
  if (affector_id == patient_id) fail(ErrorKind::argument, "affector and patient are the same object");
  if (without_affector.removed_id != affector_id) {
    fail(ErrorKind::argument, "variation does not remove object " + std::to_string(affector_id));
  }
  const auto it = intents.find(patient_id);
  if (it == intents.end()) fail(ErrorKind::argument, "no intention for object " + std::to_string(patient_id));
  const bool a = achieves(base, patient_id, task);
  const bool c = achieves(without_affector.graph.events, patient_id, task);
  return {affector_id, patient_id, task, classify(a, c, it->second)};
}

}  // namespace craft

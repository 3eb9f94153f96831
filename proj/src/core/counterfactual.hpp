#pragma once

#include <future>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "events.hpp"

namespace craft {

enum class Task { enter_basket };
enum class Relation { none, cause, enable, prevent };

std::string_view name(Task t);
std::string_view name(Relation r);

/// One object-removal re-simulation. The trace is kept only on request.
struct Variation {
  int removed_id = 0;
  CausalGraph graph;
  std::optional<physics::SimulationTrace> trace;
};

/// Re-simulates `scene` without `removed_id`. Throws argument if it is not dynamic.
Variation counterfact_trace(const SceneSpec& scene, int removed_id,
                            const physics::SimConfig& config = {}, bool keep_trace = true,
                            const EventOptions& events = {});

/// Memoizes variations keyed by (scene_id, removed_id, engine_version).
/// Concurrent callers asking for the same key share one simulation.
class VariationCache {
 public:
  explicit VariationCache(physics::SimConfig config = {}, bool keep_traces = false,
                          EventOptions events = {});

  std::shared_ptr<const Variation> get(const SceneSpec& scene, int removed_id);
  std::size_t size() const;
  /// Completed variations in key order.
  std::vector<std::shared_ptr<const Variation>> entries() const;
  /// Number of simulations actually run (cache misses).
  std::size_t simulations() const;

 private:
  using Key = std::tuple<std::string, int, std::string>;
  physics::SimConfig config_;
  bool keep_traces_;
  EventOptions events_;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_future<std::shared_ptr<const Variation>>> entries_;
  std::size_t simulations_ = 0;
};

struct VariationSet {
  std::string scene_id;
  std::map<int, std::shared_ptr<const Variation>> variations;
};

/// One variation per dynamic object.
VariationSet compute_variation_set(const SceneSpec& scene, VariationCache& cache);

/// True when `object_id` has an event completing `task` in `events`.
bool achieves(const std::vector<Event>& events, int object_id, Task task = Task::enter_basket);

/// cause: A & !C & !I, enable: A & !C & I, prevent: !A & C & I, otherwise none.
Relation classify(bool actual, bool counterfactual, bool intended);

struct CausalRelation {
  int affector_id = 0;
  int patient_id = 0;
  Task task = Task::enter_basket;
  Relation relation = Relation::none;
};

CausalRelation classify_relation(int affector_id, int patient_id, const std::vector<Event>& base,
                                 const Variation& without_affector, const IntentionTable& intents,
                                 Task task = Task::enter_basket);

}  // namespace craft

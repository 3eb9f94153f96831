#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "counterfactual.hpp"
#include "dsl/typecheck.hpp"

namespace craft::dsl {

/// Everything a program may look at: start/end states, the causal events,
/// intentions, and a provider of object-removal variations.
struct SimContext {
  SceneSpec scene;
  std::vector<physics::BodyState> initial;  // dynamics only
  std::vector<physics::BodyState> final;
  std::vector<Event> events;
  IntentionTable intentions;
  std::function<std::shared_ptr<const Variation>(int removed_id)> counterfactual;

  const physics::BodyState* state_at(int object_id, int step) const;
  bool is_dynamic(int object_id) const;
  std::vector<int> all_object_ids() const;
  std::vector<int> ids_of_kind(StaticKind kind) const;
};

/// `cache` may be null; GetCounterfactEvents then raises an evaluation error.
SimContext make_context(const SceneSpec& scene, const physics::SimulationTrace& trace,
                        std::vector<Event> events, std::shared_ptr<VariationCache> cache);

/// Typechecks then evaluates. Returns Invalid when any module yields Invalid.
/// Throws ErrorKind::type for ill-typed programs and ErrorKind::evaluation
/// (with the node path) for runtime faults such as an unsupported step index.
Value evaluate(const Program& program, const SimContext& ctx);
Value evaluate(const TypedProgram& program, const SimContext& ctx);

/// evaluate() rendered into the answer vocabulary; nullopt when not answerable.
std::optional<std::string> answer(const Program& program, const SimContext& ctx);

/// Runs one module on already evaluated arguments.
Value apply_module(const std::string& module, const std::vector<Value>& args, const SimContext& ctx);

}  // namespace craft::dsl

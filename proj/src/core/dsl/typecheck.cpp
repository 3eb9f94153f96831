#include "dsl/typecheck.hpp"

#include <algorithm>
#include <cstdlib>

#include "error.hpp"

namespace craft::dsl {

std::string_view name(ModuleGroup g) {
  switch (g) {
    case ModuleGroup::input: return "input";
    case ModuleGroup::output: return "output";
    case ModuleGroup::object_filter: return "object_filter";
    case ModuleGroup::event_filter: return "event_filter";
    case ModuleGroup::auxiliary: return "auxiliary";
  }
  return "?";
}

const std::vector<ModuleInfo>& module_registry() {
  using T = Type;
  using G = ModuleGroup;
  static const std::vector<ModuleInfo> registry{
      {"SceneAtStart", G::input, {{{}, T::object_set}}},
      {"SceneAtEnd", G::input, {{{}, T::object_set}}},
      {"StartSceneStep", G::input, {{{}, T::integer}}},
      {"EndSceneStep", G::input, {{{}, T::integer}}},
      {"Events", G::input, {{{}, T::event_set}}},

      {"QueryColor", G::output, {{{T::object}, T::color}}},
      {"QueryShape", G::output, {{{T::object}, T::shape}}},
      {"Count", G::output, {{{T::object_set}, T::integer}}},
      {"Exist", G::output, {{{T::object_set}, T::boolean}, {{T::event_set}, T::boolean}}},
      {"AnyFalse", G::output, {{{T::bool_list}, T::boolean}}},
      {"AnyTrue", G::output, {{{T::bool_list}, T::boolean}}},
      {"IsBefore", G::output, {{{T::event, T::event}, T::boolean}}},
      {"IsAfter", G::output, {{{T::event, T::event}, T::boolean}}},

      {"FilterColor", G::object_filter, {{{T::object_set, T::color}, T::object_set}}},
      {"FilterShape", G::object_filter, {{{T::object_set, T::shape}, T::object_set}}},
      {"FilterSize", G::object_filter, {{{T::object_set, T::size}, T::object_set}}},
      {"FilterDynamic", G::object_filter, {{{T::object_set}, T::object_set}}},
      {"FilterMoving", G::object_filter, {{{T::object_set, T::integer}, T::object_set}}},
      {"FilterStationary", G::object_filter, {{{T::object_set, T::integer}, T::object_set}}},

      {"FilterEvents", G::event_filter, {{{T::event_set, T::object}, T::event_set}}},
      {"FilterCollision", G::event_filter, {{{T::event_set}, T::event_set}}},
      {"FilterCollisionWithDynamics", G::event_filter, {{{T::event_set}, T::event_set}}},
      {"FilterCollideGround", G::event_filter, {{{T::event_set}, T::event_set}}},
      {"FilterCollideGroundList", G::event_filter, {{{T::event_set_list}, T::event_set_list}}},
      {"FilterCollideBasket", G::event_filter, {{{T::event_set}, T::event_set}}},
      {"FilterCollideBasketList", G::event_filter, {{{T::event_set_list}, T::event_set_list}}},
      {"FilterEnterBasket", G::event_filter, {{{T::event_set}, T::event_set}}},
      {"FilterEnterBasketList", G::event_filter, {{{T::event_set_list}, T::event_set_list}}},
      {"FilterBefore", G::event_filter, {{{T::event_set, T::event}, T::event_set}}},
      {"FilterAfter", G::event_filter, {{{T::event_set, T::event}, T::event_set}}},
      {"FilterFirst", G::event_filter, {{{T::event_set}, T::event}}},
      {"FilterLast", G::event_filter, {{{T::event_set}, T::event}}},
      {"EventPartner", G::event_filter, {{{T::event, T::object}, T::object}}},
      {"FilterObjectsFromEvents", G::event_filter, {{{T::event_set}, T::object_set}}},
      {"FilterObjectsFromEventsList", G::event_filter, {{{T::event_set_list}, T::object_set_list}}},
      {"GetCounterfactEvents", G::event_filter, {{{T::object}, T::event_set}}},
      {"GetCounterfactEventsList", G::event_filter, {{{T::object_set}, T::event_set_list}}},

      {"Unique", G::auxiliary, {{{T::object_set}, T::object}}},
      {"Intersect", G::auxiliary, {{{T::object_set, T::object_set}, T::object_set}}},
      {"IntersectList", G::auxiliary, {{{T::object_set_list, T::object_set}, T::object_set_list}}},
      {"Difference", G::auxiliary, {{{T::object_set, T::object_set}, T::object_set}}},
      {"ExistList", G::auxiliary, {{{T::object_set_list}, T::bool_list}, {{T::event_set_list}, T::bool_list}}},
      {"AsList", G::auxiliary, {{{T::object}, T::object_set}}},
  };
  return registry;
}

const ModuleInfo* find_module(std::string_view module) {
  for (const auto& m : module_registry()) {
    if (m.name == module) return &m;
  }
  return nullptr;
}

std::string describe_signatures(const ModuleInfo& m) {
  std::string out;
  for (const auto& sig : m.overloads) {
    if (!out.empty()) out += " | ";
    out += m.name + "(";
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
      out += std::string(i ? ", " : "") + std::string(name(sig.params[i]));
    }
    out += ") -> " + std::string(name(sig.result));
  }
  return out;
}

bool literal_type(Type t) {
  return t == Type::color || t == Type::shape || t == Type::size || t == Type::integer;
}

bool is_placeholder(const std::string& text) {
  return text.size() >= 3 && text.front() == '<' && text.back() == '>';
}

std::optional<Value> parse_literal(Type t, const std::string& text) {
  switch (t) {
    case Type::color:
      if (auto c = parse_color(text)) return Value{*c};
      return std::nullopt;
    case Type::shape:
      if (auto s = parse_shape(text)) return Value{*s};
      return std::nullopt;
    case Type::size:
      if (auto s = parse_size(text)) return Value{*s};
      return std::nullopt;
    case Type::integer: {
      if (text.empty()) return std::nullopt;
      char* end = nullptr;
      const long v = std::strtol(text.c_str(), &end, 10);
      if (*end != '\0') return std::nullopt;
      return Value{Integer{static_cast<int>(v)}};
    }
    default:
      return std::nullopt;
  }
}

std::size_t resolve_overload(const ModuleInfo& m, const std::vector<Type>& child_types,
                             const std::vector<std::string>& literals, bool allow_placeholders) {
  for (std::size_t k = 0; k < m.overloads.size(); ++k) {
    const auto& params = m.overloads[k].params;
    if (params.size() != child_types.size() + literals.size()) continue;
    bool ok = std::equal(child_types.begin(), child_types.end(), params.begin());
    for (std::size_t i = 0; ok && i < literals.size(); ++i) {
      const Type t = params[child_types.size() + i];
      ok = literal_type(t) &&
           ((allow_placeholders && is_placeholder(literals[i])) || parse_literal(t, literals[i]).has_value());
    }
    if (ok) return k;
  }
  return m.overloads.size();
}

namespace {

std::string argument_list(const std::vector<Type>& types, const std::vector<std::string>& literals) {
  std::string s = "(";
  bool first = true;
  for (auto t : types) {
    s += (first ? "" : ", ") + std::string(name(t));
    first = false;
  }
  for (const auto& l : literals) {
    s += (first ? "\"" : ", \"") + l + "\"";
    first = false;
  }
  return s + ")";
}

Type infer(const Node& n, const std::map<std::string, Type>& env, const TypecheckOptions& options,
           const std::string& path) {
  if (n.is_var()) {
    const auto it = env.find(n.var);
    if (it == env.end()) fail(ErrorKind::type, "at " + path + ": unbound variable " + n.var);
    return it->second;
  }
  const std::string here = path + "/" + n.module;
  const ModuleInfo* m = find_module(n.module);
  if (!m) fail(ErrorKind::type, "at " + here + ": unknown module " + n.module);
  std::vector<Type> child_types;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    child_types.push_back(infer(n.children[i], env, options, here + "[" + std::to_string(i) + "]"));
  }
  const std::size_t k = resolve_overload(*m, child_types, n.literals, options.allow_placeholders);
  if (k == m->overloads.size()) {
    fail(ErrorKind::type, "at " + here + ": expected " + describe_signatures(*m) + ", got " +
                              argument_list(child_types, n.literals));
  }
  return m->overloads[k].result;
}

}  // namespace

TypedProgram typecheck(const Program& p, const TypecheckOptions& options) {
  TypedProgram typed;
  typed.program = p;
  for (const auto& b : p.bindings) {
    if (b.name.empty()) fail(ErrorKind::type, "binding without a name");
    if (typed.binding_types.contains(b.name)) fail(ErrorKind::type, "variable bound twice: " + b.name);
    if (find_module(b.name)) fail(ErrorKind::type, "variable shadows module name: " + b.name);
    typed.binding_types[b.name] = infer(b.value, typed.binding_types, options, "Var " + b.name);
  }
  typed.root_type = infer(p.root, typed.binding_types, options, "root");
  if (options.require_output_root && !answer_type_of(typed.root_type)) {
    fail(ErrorKind::type, "root has type " + std::string(name(typed.root_type)) +
                              "; expected Color, Shape, Integer or Bool");
  }
  return typed;
}

}  // namespace craft::dsl

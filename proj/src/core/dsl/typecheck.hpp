#pragma once

#include <map>
#include <string>
#include <vector>

#include "dsl/program.hpp"
#include "dsl/value.hpp"

namespace craft::dsl {

enum class ModuleGroup { input, output, object_filter, event_filter, auxiliary };
std::string_view name(ModuleGroup g);

struct Signature {
  std::vector<Type> params;
  Type result = Type::invalid;
};

struct ModuleInfo {
  std::string name;
  ModuleGroup group = ModuleGroup::auxiliary;
  std::vector<Signature> overloads;
};

const std::vector<ModuleInfo>& module_registry();
const ModuleInfo* find_module(std::string_view name);
/// "FilterColor(ObjectSet, Color) -> ObjectSet" style listing of every overload.
std::string describe_signatures(const ModuleInfo& m);

/// Literal types accepted in trailing argument positions.
bool literal_type(Type t);
/// Parses a literal for a slot of type `t`; nullopt when it does not fit.
std::optional<Value> parse_literal(Type t, const std::string& text);
/// "<Z>"-style template placeholders.
bool is_placeholder(const std::string& text);

struct TypecheckOptions {
  bool allow_placeholders = false;  // template skeletons before binding
  bool require_output_root = true;  // root in {Color, Shape, Integer, Bool}
};

struct TypedProgram {
  Program program;
  Type root_type = Type::invalid;
  std::map<std::string, Type> binding_types;
};

/// Throws ErrorKind::type naming the node path and the expected signature.
TypedProgram typecheck(const Program& p, const TypecheckOptions& options = {});

/// Index of the overload matched by `node`, given its children's types.
std::size_t resolve_overload(const ModuleInfo& m, const std::vector<Type>& child_types,
                             const std::vector<std::string>& literals, bool allow_placeholders);

}  // namespace craft::dsl

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace craft::dsl {

/// A module call or a reference to a let-bound variable.
/// Children fill a signature's leading parameters, literals the trailing ones.
struct Node {
  std::string module;  // empty for variable references
  std::string var;
  std::vector<Node> children;
  std::vector<std::string> literals;

  bool is_var() const { return !var.empty(); }
  static Node call(std::string module, std::vector<Node> children = {},
                   std::vector<std::string> literals = {});
  static Node ref(std::string var);
  friend bool operator==(const Node&, const Node&) = default;
};

struct Binding {
  std::string name;
  Node value;
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct Program {
  std::vector<Binding> bindings;  // evaluated in order; later ones may use earlier ones
  Node root;
  friend bool operator==(const Program&, const Program&) = default;
};

nlohmann::json to_json(const Node& n);
Node node_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Program& p);
/// Throws ErrorKind::parse on malformed input.
Program program_from_json(const nlohmann::json& j);

/// Parses the textual form:
///   Var Name = Module ( child, ..., "Literal" )
///   Module ( ... )
/// Curly quotes are accepted as string delimiters. Throws ErrorKind::parse.
Program parse_program(std::string_view text);

/// Single-line rendering of a node.
std::string to_inline(const Node& n);
/// Indented multi-line rendering; bindings on single lines, then the root.
std::string pretty(const Program& p);

/// Replaces every literal equal to a key of `values` by the mapped text.
Program substitute(Program p, const std::vector<std::pair<std::string, std::string>>& values);

/// Every module name used, in first-use order.
std::vector<std::string> modules_used(const Program& p);

}  // namespace craft::dsl

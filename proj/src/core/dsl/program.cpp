#include "dsl/program.hpp"

#include <cctype>
#include <set>

#include "error.hpp"

namespace craft::dsl {

Node Node::call(std::string module, std::vector<Node> children, std::vector<std::string> literals) {
  Node n;
  n.module = std::move(module);
  n.children = std::move(children);
  n.literals = std::move(literals);
  return n;
}

Node Node::ref(std::string var) {
  Node n;
  n.var = std::move(var);
  return n;
}

nlohmann::json to_json(const Node& n) {
  if (n.is_var()) return {{"var", n.var}};
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : n.children) children.push_back(to_json(c));
  return {{"module", n.module}, {"args", n.literals}, {"children", std::move(children)}};
}

Node node_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::parse, "program node must be an object: " + j.dump());
  if (j.contains("var")) {
    if (!j.at("var").is_string() || j.at("var").get<std::string>().empty()) {
      fail(ErrorKind::parse, "variable reference needs a non-empty name");
    }
    return Node::ref(j.at("var").get<std::string>());
  }
  if (!j.contains("module") || !j.at("module").is_string()) {
    fail(ErrorKind::parse, "program node lacks a module name: " + j.dump());
  }
  Node n;
  n.module = j.at("module").get<std::string>();
  if (n.module.empty()) fail(ErrorKind::parse, "empty module name");
  if (j.contains("args")) {
    for (const auto& a : j.at("args")) {
      if (a.is_string()) {
        n.literals.push_back(a.get<std::string>());
      } else if (a.is_number_integer()) {
        n.literals.push_back(std::to_string(a.get<long long>()));
      } else {
        fail(ErrorKind::parse, "literal argument must be a string or integer in " + n.module);
      }
    }
  }
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
  }
  return n;
}

nlohmann::json to_json(const Program& p) {
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto& b : p.bindings) bindings.push_back({{"name", b.name}, {"value", to_json(b.value)}});
  return {{"bindings", std::move(bindings)}, {"root", to_json(p.root)}};
}

Program program_from_json(const nlohmann::json& j) {
  try {
    Program p;
    if (j.contains("bindings")) {
      for (const auto& b : j.at("bindings")) {
        p.bindings.push_back({b.at("name").get<std::string>(), node_from_json(b.at("value"))});
      }
    }
    if (!j.contains("root")) fail(ErrorKind::parse, "program lacks a root");
    p.root = node_from_json(j.at("root"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed program JSON: ") + e.what());
  }
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Program program() {
    Program p;
    skip_space();
    while (peek_word() == "Var") {
      take_word();
      Binding b;
      b.name = identifier();
      expect('=');
      b.value = expression();
      p.bindings.push_back(std::move(b));
      skip_space();
    }
    p.root = expression();
    skip_space();
    if (pos_ != text_.size()) error("unexpected trailing text");
    return p;
  }

 private:
  struct Arg {
    bool literal = false;
    Node node;
    std::string text;
  };

  Node expression() {
    skip_space();
    const std::string word = identifier();
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '(') return Node::ref(word);
    ++pos_;
    Node n;
    n.module = word;
    skip_space();
    if (!consume(')')) {
      for (;;) {
        Arg a = argument();
        if (a.literal) {
          n.literals.push_back(std::move(a.text));
        } else {
          if (!n.literals.empty()) error("module arguments must precede literals in " + word);
          n.children.push_back(std::move(a.node));
        }
        skip_space();
        if (consume(')')) break;
        expect(',');
      }
    }
    return n;
  }

  Arg argument() {
    skip_space();
    if (pos_ >= text_.size()) error("unexpected end of program");
    if (text_[pos_] == '"' || starts_with("\xE2\x80\x9C")) return {true, {}, string_literal()};
    if (text_[pos_] == '-' || std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      const std::size_t start = pos_++;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return {true, {}, std::string(text_.substr(start, pos_ - start))};
    }
    return {false, expression(), {}};
  }

  std::string string_literal() {
    const bool curly = text_[pos_] != '"';
    pos_ += curly ? 3 : 1;
    const std::size_t start = pos_;
    for (; pos_ < text_.size(); ++pos_) {
      if (!curly && text_[pos_] == '"') {
        return std::string(text_.substr(start, pos_++ - start));
      }
      if (curly && (starts_with("\xE2\x80\x9D") || starts_with("\xE2\x80\x9C"))) {
        std::string s(text_.substr(start, pos_ - start));
        pos_ += 3;
        return s;
      }
    }
    error("unterminated string literal");
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) error("expected an identifier");
    if (std::isdigit(static_cast<unsigned char>(text_[start]))) error("identifier starts with a digit");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view peek_word() {
    std::size_t end = pos_;
    while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
    if (end < text_.size() && text_[end] == '(') return {};
    return text_.substr(pos_, end - pos_);
  }

  void take_word() {
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) error(std::string("expected '") + c + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::parse, what + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool is_integer_literal(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

std::string literal_text(const std::string& s) { return is_integer_literal(s) ? s : "\"" + s + "\""; }

constexpr std::size_t kInlineWidth = 56;

void pretty_node(const Node& n, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 4, ' ');
  const std::string flat = to_inline(n);
  if (n.is_var() || flat.size() + pad.size() <= kInlineWidth || n.children.empty()) {
    out += pad + flat;
    return;
  }
  out += pad + n.module + " (\n";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    pretty_node(n.children[i], depth + 1, out);
    if (i + 1 < n.children.size() || !n.literals.empty()) out += ",";
    out += "\n";
  }
  for (std::size_t i = 0; i < n.literals.size(); ++i) {
    out += pad + "    " + literal_text(n.literals[i]);
    if (i + 1 < n.literals.size()) out += ",";
    out += "\n";
  }
  out += pad + ")";
}

void collect_modules(const Node& n, std::vector<std::string>& out, std::set<std::string>& seen) {
  if (!n.is_var() && seen.insert(n.module).second) out.push_back(n.module);
  for (const auto& c : n.children) collect_modules(c, out, seen);
}

void substitute_node(Node& n, const std::vector<std::pair<std::string, std::string>>& values) {
  for (auto& lit : n.literals) {
    for (const auto& [key, value] : values) {
      if (lit == key) {
        lit = value;
        break;
      }
    }
  }
  for (auto& c : n.children) substitute_node(c, values);
}

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }

std::string to_inline(const Node& n) {
  if (n.is_var()) return n.var;
  if (n.children.empty() && n.literals.empty()) return n.module + "()";
  std::string s = n.module + " ( ";
  bool first = true;
  for (const auto& c : n.children) {
    s += (first ? "" : ", ") + to_inline(c);
    first = false;
  }
  for (const auto& l : n.literals) {
    s += (first ? "" : ", ") + literal_text(l);
    first = false;
  }
  return s + " )";
}

std::string pretty(const Program& p) {
  std::string out;
  for (const auto& b : p.bindings) out += "Var " + b.name + " = " + to_inline(b.value) + "\n";
  pretty_node(p.root, 0, out);
  out += "\n";
  return out;
}

Program substitute(Program p, const std::vector<std::pair<std::string, std::string>>& values) {
  for (auto& b : p.bindings) substitute_node(b.value, values);
  substitute_node(p.root, values);
  return p;
}

std::vector<std::string> modules_used(const Program& p) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& b : p.bindings) collect_modules(b.value, out, seen);
  collect_modules(p.root, out, seen);
  return out;
}

}  // namespace craft::dsl

#include "dsl/value.hpp"

#include <algorithm>
#include <array>

namespace craft::dsl {

namespace {

constexpr std::array<std::pair<Type, std::string_view>, 13> kTypeNames{{
    {Type::invalid, "Invalid"},
    {Type::object, "Object"},
    {Type::object_set, "ObjectSet"},
    {Type::object_set_list, "ObjectSetList"},
    {Type::event, "Event"},
    {Type::event_set, "EventSet"},
    {Type::event_set_list, "EventSetList"},
    {Type::size, "Size"},
    {Type::color, "Color"},
    {Type::shape, "Shape"},
    {Type::integer, "Integer"},
    {Type::boolean, "Bool"},
    {Type::bool_list, "BoolList"},
}};

}  // namespace

std::string_view name(Type t) {
  for (const auto& [type, text] : kTypeNames) {
    if (type == t) return text;
  }
  return "?";
}

std::optional<Type> parse_type(std::string_view s) {
  for (const auto& [type, text] : kTypeNames) {
    if (text == s) return type;
  }
  return std::nullopt;
}

Type type_of(const Value& v) {
  struct Visitor {
    Type operator()(const Invalid&) const { return Type::invalid; }
    Type operator()(const ObjectRef&) const { return Type::object; }
    Type operator()(const ObjectSet&) const { return Type::object_set; }
    Type operator()(const ObjectSetList&) const { return Type::object_set_list; }
    Type operator()(const Event&) const { return Type::event; }
    Type operator()(const EventSet&) const { return Type::event_set; }
    Type operator()(const EventSetList&) const { return Type::event_set_list; }
    Type operator()(const Size&) const { return Type::size; }
    Type operator()(const Color&) const { return Type::color; }
    Type operator()(const Shape&) const { return Type::shape; }
    Type operator()(const Integer&) const { return Type::integer; }
    Type operator()(const Bool&) const { return Type::boolean; }
    Type operator()(const BoolList&) const { return Type::bool_list; }
  };
  return std::visit(Visitor{}, v);
}

ObjectSet make_object_set(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ObjectSet{std::move(ids)};
}

const std::vector<std::string>& answer_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v;
    for (auto t : {AnswerType::color, AnswerType::shape, AnswerType::boolean, AnswerType::count}) {
      for (auto& a : answers_of_type(t)) v.push_back(std::move(a));
    }
    return v;
  }();
  return vocab;
}

std::string_view name(AnswerType t) {
  switch (t) {
    case AnswerType::color: return "color";
    case AnswerType::shape: return "shape";
    case AnswerType::count: return "count";
    case AnswerType::boolean: return "boolean";
  }
  return "?";
}

std::optional<AnswerType> parse_answer_type(std::string_view s) {
  for (auto t : {AnswerType::color, AnswerType::shape, AnswerType::count, AnswerType::boolean}) {
    if (name(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<AnswerType> answer_type_of(Type t) {
  switch (t) {
    case Type::color: return AnswerType::color;
    case Type::shape: return AnswerType::shape;
    case Type::integer: return AnswerType::count;
    case Type::boolean: return AnswerType::boolean;
    default: return std::nullopt;
  }
}

std::vector<std::string> answers_of_type(AnswerType t) {
  std::vector<std::string> out;
  switch (t) {
    case AnswerType::color:
      for (auto c : kAllColors) out.emplace_back(name(c));
      break;
    case AnswerType::shape:
      for (auto s : kAllShapes) out.emplace_back(name(s));
      break;
    case AnswerType::boolean:
      out = {"True", "False"};
      break;
    case AnswerType::count:
      for (int i = 0; i <= kMaxCountAnswer; ++i) out.push_back(std::to_string(i));
      break;
  }
  return out;
}

std::optional<AnswerType> answer_type_of(std::string_view answer) {
  for (auto t : {AnswerType::color, AnswerType::shape, AnswerType::count, AnswerType::boolean}) {
    const auto all = answers_of_type(t);
    if (std::find(all.begin(), all.end(), answer) != all.end()) return t;
  }
  return std::nullopt;
}

std::optional<std::string> render_answer(const Value& v) {
  if (const auto* c = std::get_if<Color>(&v)) return std::string(name(*c));
  if (const auto* s = std::get_if<Shape>(&v)) return std::string(name(*s));
  if (const auto* b = std::get_if<Bool>(&v)) return b->value ? "True" : "False";
  if (const auto* i = std::get_if<Integer>(&v)) {
    if (i->value < 0 || i->value > kMaxCountAnswer) return std::nullopt;
    return std::to_string(i->value);
  }
  return std::nullopt;
}

namespace {

std::string join_ids(const std::vector<int>& ids) {
  std::string s = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
  return s + "}";
}

std::string event_text(const Event& e) {
  std::string s = std::string(name(e.type)) + "@" + std::to_string(e.tick);
  if (!e.participants.empty()) s += join_ids(e.participants);
  return s;
}

std::string events_text(const EventSet& set) {
  std::string s = "[";
  for (std::size_t i = 0; i < set.items.size(); ++i) s += (i ? ", " : "") + event_text(set.items[i]);
  return s + "]";
}

}  // namespace

std::string to_string(const Value& v) {
  struct Visitor {
    std::string operator()(const Invalid&) const { return "INVALID"; }
    std::string operator()(const ObjectRef& o) const { return "#" + std::to_string(o.id); }
    std::string operator()(const ObjectSet& s) const { return join_ids(s.ids); }
    std::string operator()(const ObjectSetList& l) const {
      std::string s = "[";
      for (std::size_t i = 0; i < l.items.size(); ++i) s += (i ? ", " : "") + join_ids(l.items[i].ids);
      return s + "]";
    }
    std::string operator()(const Event& e) const { return event_text(e); }
    std::string operator()(const EventSet& e) const { return events_text(e); }
    std::string operator()(const EventSetList& l) const {
      std::string s = "[";
      for (std::size_t i = 0; i < l.items.size(); ++i) s += (i ? ", " : "") + events_text(l.items[i]);
      return s + "]";
    }
    std::string operator()(const Size& x) const { return std::string(name(x)); }
    std::string operator()(const Color& x) const { return std::string(name(x)); }
    std::string operator()(const Shape& x) const { return std::string(name(x)); }
    std::string operator()(const Integer& x) const { return std::to_string(x.value); }
    std::string operator()(const Bool& x) const { return x.value ? "True" : "False"; }
    std::string operator()(const BoolList& l) const {
      std::string s = "[";
      for (std::size_t i = 0; i < l.items.size(); ++i) s += std::string(i ? ", " : "") + (l.items[i] ? "True" : "False");
      return s + "]";
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace craft::dsl

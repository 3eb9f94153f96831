#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "events.hpp"
#include "scene.hpp"

namespace craft::dsl {

enum class Type {
  invalid,
  object,
  object_set,
  object_set_list,
  event,
  event_set,
  event_set_list,
  size,
  color,
  shape,
  integer,
  boolean,
  bool_list,
};

std::string_view name(Type t);
std::optional<Type> parse_type(std::string_view s);

struct Invalid {
  friend bool operator==(const Invalid&, const Invalid&) = default;
};
struct ObjectRef {
  int id = 0;
  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};
/// Sorted, unique object ids.
struct ObjectSet {
  std::vector<int> ids;
  friend bool operator==(const ObjectSet&, const ObjectSet&) = default;
};
struct ObjectSetList {
  std::vector<ObjectSet> items;
  friend bool operator==(const ObjectSetList&, const ObjectSetList&) = default;
};
/// Events in deterministic order, unique by event id within one trace.
struct EventSet {
  std::vector<Event> items;
  friend bool operator==(const EventSet&, const EventSet&) = default;
};
struct EventSetList {
  std::vector<EventSet> items;
  friend bool operator==(const EventSetList&, const EventSetList&) = default;
};
struct Integer {
  int value = 0;
  friend bool operator==(const Integer&, const Integer&) = default;
};
struct Bool {
  bool value = false;
  friend bool operator==(const Bool&, const Bool&) = default;
};
struct BoolList {
  std::vector<bool> items;
  friend bool operator==(const BoolList&, const BoolList&) = default;
};

using Value = std::variant<Invalid, ObjectRef, ObjectSet, ObjectSetList, Event, EventSet, EventSetList,
                           Size, Color, Shape, Integer, Bool, BoolList>;

Type type_of(const Value& v);
inline bool is_invalid(const Value& v) { return std::holds_alternative<Invalid>(v); }

ObjectSet make_object_set(std::vector<int> ids);

/// Fixed answer vocabulary: 8 colors, 3 shapes, True/False, integers 0..10.
inline constexpr int kMaxCountAnswer = 10;
inline constexpr std::string_view kVocabularyVersion = "craft-answers/1";
const std::vector<std::string>& answer_vocabulary();

enum class AnswerType { color, shape, count, boolean };
std::string_view name(AnswerType t);
std::optional<AnswerType> parse_answer_type(std::string_view s);
std::optional<AnswerType> answer_type_of(Type t);
/// Answers belonging to one answer type, in vocabulary order.
std::vector<std::string> answers_of_type(AnswerType t);
std::optional<AnswerType> answer_type_of(std::string_view answer);

/// Renders a root value into the vocabulary; nullopt when Invalid or out of vocabulary.
std::optional<std::string> render_answer(const Value& v);

/// Debug rendering of any value.
std::string to_string(const Value& v);

}  // namespace craft::dsl

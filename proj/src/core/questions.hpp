#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsl/evaluate.hpp"
#include "rng.hpp"

namespace craft {

enum class Category { causal, counterfactual, descriptive };
enum class VerbClass { none, cause, enable, prevent };

std::string_view name(Category c);
std::optional<Category> parse_category(std::string_view s);
std::string_view name(VerbClass v);
std::optional<VerbClass> parse_verb_class(std::string_view s);

/// The eleven subcategories, in catalog order.
const std::vector<std::string>& subcategories();
std::optional<Category> category_of_subcategory(std::string_view sub);

/// Base word -> surface alternatives (base word included).
struct SynonymTable {
  std::map<std::string, std::vector<std::string>> words;
  std::map<VerbClass, std::vector<std::string>> verbs;

  static SynonymTable defaults();
  /// Base words only.
  static SynonymTable none();
  std::vector<std::string> options(const std::string& base) const;
  std::vector<std::string> verb_options(VerbClass v) const;
};

enum class VerbForm { base, third_person, past_participle, gerund };
std::string conjugate(const std::string& verb, VerbForm form);

struct QuestionTemplate {
  std::string template_id;
  Category category = Category::descriptive;
  std::string subcategory;
  dsl::AnswerType answer_type = dsl::AnswerType::boolean;
  VerbClass verb_class = VerbClass::none;
  int object_slots = 0;  // 0, 1 or 2 bound objects
  std::vector<std::string> texts;
  std::string program_text;  // with <OBJ>/<OBJ2> macros and <Z>..<S2> literals
  dsl::Program skeleton;     // macro-expanded and parsed
};

struct TemplateCatalog {
  std::string version;
  std::vector<QuestionTemplate> templates;

  const QuestionTemplate& find(const std::string& template_id) const;
};

/// Validates slot usage, subcategory/category agreement and skeleton types.
TemplateCatalog parse_templates(const nlohmann::json& j);
TemplateCatalog load_templates(const std::string& path);
const TemplateCatalog& bundled_templates();
/// The bundled 48 templates.
const std::vector<QuestionTemplate>& enumerate_tasks();

/// Expands <OBJ> / <OBJ2> into the attribute filter chain wrapped in Unique.
std::string expand_object_macros(const std::string& program_text);

struct ObjectBinding {
  int id = 0;
  Size size = Size::small;
  Color color = Color::gray;
  Shape shape = Shape::cube;
};

ObjectBinding bind_object(const DynamicObject& d);

/// Fills <Z> <C> <S> <Z2> <C2> <S2> and verb slots <V> <V3> <Ved> <Ving>.
/// One synonym is drawn per slot; one verb per question.
/// Throws ErrorKind::internal on an unbound slot.
std::string render_text(const std::string& variant, const std::vector<ObjectBinding>& objects,
                        VerbClass verb_class, const SynonymTable& synonyms, Rng& rng);

/// Skeleton with the object literals filled in canonical (base) words.
dsl::Program bind_program(const QuestionTemplate& t, const std::vector<ObjectBinding>& objects);

struct QAInstance {
  std::string instance_id;
  std::string scene_id;
  int layout_id = 0;
  std::string template_id;
  Category category = Category::descriptive;
  std::string subcategory;
  dsl::AnswerType answer_type = dsl::AnswerType::boolean;
  std::string question;
  dsl::Program program;
  std::string answer;
  std::vector<int> object_ids;
  std::string split;
  std::string validation = "pending";

  friend bool operator==(const QAInstance&, const QAInstance&) = default;
};

nlohmann::json to_json(const QAInstance& q);
QAInstance instance_from_json(const nlohmann::json& j);

struct Instantiation {
  std::optional<QAInstance> instance;
  std::string rejection;  // empty when accepted
};

/// Binds `objects` (dynamic ids, one per slot) and evaluates. Rejections are
/// normal outcomes: unknown or repeated objects, Invalid or out-of-vocabulary
/// answers, and causal yes/no questions whose pair has no causal relation.
Instantiation instantiate(const QuestionTemplate& t, const dsl::SimContext& ctx,
                          const std::vector<int>& objects, Rng& rng,
                          const SynonymTable& synonyms = SynonymTable::defaults());

/// Draws objects for the slots uniformly without replacement, then instantiates.
Instantiation instantiate(const QuestionTemplate& t, const dsl::SimContext& ctx, Rng& rng,
                          const SynonymTable& synonyms = SynonymTable::defaults());

}  // namespace craft

#include "questions.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"

namespace craft {

std::string bundled_templates_text();

std::string_view name(Category c) {
  switch (c) {
    case Category::causal: return "Causal";
    case Category::counterfactual: return "Counterfactual";
    case Category::descriptive: return "Descriptive";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view s) {
  for (auto c : {Category::causal, Category::counterfactual, Category::descriptive}) {
    if (name(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view name(VerbClass v) {
  switch (v) {
    case VerbClass::none: return "none";
    case VerbClass::cause: return "cause";
    case VerbClass::enable: return "enable";
    case VerbClass::prevent: return "prevent";
  }
  return "?";
}

std::optional<VerbClass> parse_verb_class(std::string_view s) {
  for (auto v : {VerbClass::none, VerbClass::cause, VerbClass::enable, VerbClass::prevent}) {
    if (name(v) == s) return v;
  }
  return std::nullopt;
}

const std::vector<std::string>& subcategories() {
  static const std::vector<std::string> subs{"C/A", "C/N", "CF/N", "CF/O", "D/2Q", "D/C",
                                             "D/C-T", "D/N-T", "D/N-V", "D/S", "D/TO"};
  return subs;
}

std::optional<Category> category_of_subcategory(std::string_view sub) {
  if (sub.starts_with("CF/")) return Category::counterfactual;
  if (sub.starts_with("C/")) return Category::causal;
  if (sub.starts_with("D/")) return Category::descriptive;
  return std::nullopt;
}

SynonymTable SynonymTable::defaults() {
  SynonymTable t;
  t.words = {
      {"small", {"small", "tiny"}},
      {"large", {"large", "big"}},
      {"cube", {"cube", "square", "block", "box"}},
      {"circle", {"circle", "ball", "sphere"}},
  };
  t.verbs = {
      {VerbClass::cause, {"cause", "stimulate", "trigger"}},
      {VerbClass::enable, {"enable", "help", "allow"}},
      {VerbClass::prevent, {"prevent", "keep", "hold", "block", "hinder"}},
  };
  return t;
}

SynonymTable SynonymTable::none() { return {}; }

std::vector<std::string> SynonymTable::options(const std::string& base) const {
  const auto it = words.find(base);
  if (it == words.end() || it->second.empty()) return {base};
  return it->second;
}

std::vector<std::string> SynonymTable::verb_options(VerbClass v) const {
  const auto it = verbs.find(v);
  if (it == verbs.end() || it->second.empty()) return {std::string(name(v))};
  return it->second;
}

std::string conjugate(const std::string& verb, VerbForm form) {
  static const std::map<std::string, std::string> irregular_participles{{"keep", "kept"}, {"hold", "held"}};
  switch (form) {
    case VerbForm::base:
      return verb;
    case VerbForm::third_person:
      return verb + "s";
    case VerbForm::past_participle: {
      if (auto it = irregular_participles.find(verb); it != irregular_participles.end()) return it->second;
      return verb.ends_with('e') ? verb + "d" : verb + "ed";
    }
    case VerbForm::gerund:
      if (verb.ends_with('e') && !verb.ends_with("ee")) return verb.substr(0, verb.size() - 1) + "ing";
      return verb + "ing";
  }
  return verb;
}

const QuestionTemplate& TemplateCatalog::find(const std::string& template_id) const {
  for (const auto& t : templates) {
    if (t.template_id == template_id) return t;
  }
  fail(ErrorKind::argument, "unknown template " + template_id);
}

std::string expand_object_macros(const std::string& program_text) {
  auto chain = [](const std::string& suffix) {
    return "Unique ( FilterShape ( FilterColor ( FilterSize ( SceneAtStart(), \"<Z" + suffix + ">\" ), \"<C" +
           suffix + ">\" ), \"<S" + suffix + ">\" ) )";
  };
  std::string out;
  std::size_t pos = 0;
  while (pos < program_text.size()) {
    if (program_text.compare(pos, 6, "<OBJ2>") == 0) {
      out += chain("2");
      pos += 6;
    } else if (program_text.compare(pos, 5, "<OBJ>") == 0) {
      out += chain("");
      pos += 5;
    } else {
      out += program_text[pos++];
    }
  }
  return out;
}

namespace {

const std::vector<std::string> kObjectSlots[2] = {{"<Z>", "<C>", "<S>"}, {"<Z2>", "<C2>", "<S2>"}};
const std::vector<std::string> kVerbSlots{"<V>", "<V3>", "<Ved>", "<Ving>"};

std::set<std::string> placeholders_in(const std::string& text) {
  std::set<std::string> out;
  for (std::size_t pos = text.find('<'); pos != std::string::npos; pos = text.find('<', pos + 1)) {
    const std::size_t end = text.find('>', pos);
    if (end == std::string::npos) break;
    out.insert(text.substr(pos, end - pos + 1));
  }
  return out;
}

void collect_literals(const dsl::Node& n, std::set<std::string>& out) {
  for (const auto& l : n.literals) out.insert(l);
  for (const auto& c : n.children) collect_literals(c, out);
}

std::set<std::string> program_placeholders(const dsl::Program& p) {
  std::set<std::string> lits;
  for (const auto& b : p.bindings) collect_literals(b.value, lits);
  collect_literals(p.root, lits);
  std::set<std::string> out;
  for (const auto& l : lits) {
    if (dsl::is_placeholder(l)) out.insert(l);
  }
  return out;
}

QuestionTemplate parse_template(const nlohmann::json& j) {
  QuestionTemplate t;
  t.template_id = j.at("id").get<std::string>();
  auto where = [&](const std::string& what) { return "template " + t.template_id + ": " + what; };

  const auto category = parse_category(j.at("category").get<std::string>());
  if (!category) fail(ErrorKind::validation, where("unknown category"));
  t.category = *category;
  t.subcategory = j.at("subcategory").get<std::string>();
  const auto& subs = subcategories();
  if (std::find(subs.begin(), subs.end(), t.subcategory) == subs.end()) {
    fail(ErrorKind::validation, where("unknown subcategory " + t.subcategory));
  }
  if (category_of_subcategory(t.subcategory) != t.category) {
    fail(ErrorKind::validation, where("subcategory does not belong to category"));
  }
  const auto answer_type = dsl::parse_answer_type(j.at("answer_type").get<std::string>());
  if (!answer_type) fail(ErrorKind::validation, where("unknown answer type"));
  t.answer_type = *answer_type;
  const auto verb = parse_verb_class(j.value("verb_class", std::string("none")));
  if (!verb) fail(ErrorKind::validation, where("unknown verb class"));
  t.verb_class = *verb;
  t.object_slots = j.at("objects").get<int>();
  if (t.object_slots < 0 || t.object_slots > 2) fail(ErrorKind::validation, where("objects must be 0..2"));
  t.texts = j.at("texts").get<std::vector<std::string>>();
  if (t.texts.empty()) fail(ErrorKind::validation, where("no text variants"));
  const auto& program = j.at("program");
  if (program.is_array()) {
    for (const auto& line : program) t.program_text += line.get<std::string>() + "\n";
  } else {
    t.program_text = program.get<std::string>();
  }
  try {
    t.skeleton = dsl::parse_program(expand_object_macros(t.program_text));
    const auto typed = dsl::typecheck(t.skeleton, {.allow_placeholders = true});
    if (dsl::answer_type_of(typed.root_type) != t.answer_type) {
      fail(ErrorKind::validation, where("program type does not match answer type"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::validation) throw;
    fail(ErrorKind::validation, where(e.what()));
  }

  std::set<std::string> expected;
  for (int k = 0; k < t.object_slots; ++k) expected.insert(kObjectSlots[k].begin(), kObjectSlots[k].end());
  if (program_placeholders(t.skeleton) != expected) {
    fail(ErrorKind::validation, where("program slots do not match the object count"));
  }
  for (const auto& text : t.texts) {
    std::set<std::string> object_slots;
    bool has_verb = false;
    for (const auto& p : placeholders_in(text)) {
      if (std::find(kVerbSlots.begin(), kVerbSlots.end(), p) != kVerbSlots.end()) {
        has_verb = true;
      } else {
        object_slots.insert(p);
      }
    }
    if (object_slots != expected) fail(ErrorKind::validation, where("text slots differ from program: " + text));
    if (has_verb != (t.verb_class != VerbClass::none)) {
      fail(ErrorKind::validation, where("verb slot usage does not match verb class: " + text));
    }
  }
  if (t.category == Category::causal) {
    const auto used = dsl::modules_used(t.skeleton);
    if (std::find(used.begin(), used.end(), "GetCounterfactEvents") == used.end()) {
      fail(ErrorKind::validation, where("causal program must use GetCounterfactEvents"));
    }
  }
  return t;
}

}  // namespace

TemplateCatalog parse_templates(const nlohmann::json& j) {
  TemplateCatalog catalog;
  try {
    catalog.version = j.at("version").get<std::string>();
    std::set<std::string> ids;
    for (const auto& t : j.at("templates")) {
      catalog.templates.push_back(parse_template(t));
      if (!ids.insert(catalog.templates.back().template_id).second) {
        fail(ErrorKind::validation, "duplicate template id " + catalog.templates.back().template_id);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed template catalog: ") + e.what());
  }
  if (catalog.templates.empty()) fail(ErrorKind::validation, "template catalog is empty");
  return catalog;
}

TemplateCatalog load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open template catalog " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  return parse_templates(j);
}

const TemplateCatalog& bundled_templates() {
  static const TemplateCatalog catalog = parse_templates(nlohmann::json::parse(bundled_templates_text()));
  return catalog;
}

const std::vector<QuestionTemplate>& enumerate_tasks() { return bundled_templates().templates; }

ObjectBinding bind_object(const DynamicObject& d) { return {d.id, d.size, d.color, d.shape}; }

std::string render_text(const std::string& variant, const std::vector<ObjectBinding>& objects,
                        VerbClass verb_class, const SynonymTable& synonyms, Rng& rng) {
  auto draw = [&](const std::vector<std::string>& options) { return options[rng.index(options.size())]; };
  std::map<std::string, std::string> values;
  for (std::size_t k = 0; k < objects.size() && k < 2; ++k) {
    const auto& o = objects[k];
    values[kObjectSlots[k][0]] = draw(synonyms.options(std::string(name(o.size))));
    values[kObjectSlots[k][1]] = draw(synonyms.options(std::string(name(o.color))));
    values[kObjectSlots[k][2]] = draw(synonyms.options(std::string(name(o.shape))));
  }
  if (verb_class != VerbClass::none) {
    const std::string verb = draw(synonyms.verb_options(verb_class));
    values["<V>"] = conjugate(verb, VerbForm::base);
    values["<V3>"] = conjugate(verb, VerbForm::third_person);
    values["<Ved>"] = conjugate(verb, VerbForm::past_participle);
    values["<Ving>"] = conjugate(verb, VerbForm::gerund);
  }
  std::string out;
  std::size_t pos = 0;
  while (pos < variant.size()) {
    if (variant[pos] == '<') {
      const std::size_t end = variant.find('>', pos);
      if (end == std::string::npos) fail(ErrorKind::internal, "unterminated slot in: " + variant);
      const std::string slot = variant.substr(pos, end - pos + 1);
      const auto it = values.find(slot);
      if (it == values.end()) fail(ErrorKind::internal, "unbound slot " + slot + " in: " + variant);
      out += it->second;
      pos = end + 1;
    } else {
      out += variant[pos++];
    }
  }
  return out;
}

dsl::Program bind_program(const QuestionTemplate& t, const std::vector<ObjectBinding>& objects) {
  std::vector<std::pair<std::string, std::string>> values;
  for (std::size_t k = 0; k < objects.size() && k < 2; ++k) {
    values.emplace_back(kObjectSlots[k][0], std::string(name(objects[k].size)));
    values.emplace_back(kObjectSlots[k][1], std::string(name(objects[k].color)));
    values.emplace_back(kObjectSlots[k][2], std::string(name(objects[k].shape)));
  }
  return dsl::substitute(t.skeleton, values);
}

nlohmann::json to_json(const QAInstance& q) {
  return {{"instance_id", q.instance_id},
          {"scene_id", q.scene_id},
          {"layout_id", q.layout_id},
          {"template_id", q.template_id},
          {"category", name(q.category)},
          {"subcategory", q.subcategory},
          {"answer_type", dsl::name(q.answer_type)},
          {"question", q.question},
          {"program", dsl::to_json(q.program)},
          {"answer", q.answer},
          {"object_ids", q.object_ids},
          {"split", q.split},
          {"validation", q.validation}};
}

QAInstance instance_from_json(const nlohmann::json& j) {
  try {
    QAInstance q;
    q.instance_id = j.at("instance_id").get<std::string>();
    q.scene_id = j.at("scene_id").get<std::string>();
    q.layout_id = j.at("layout_id").get<int>();
    q.template_id = j.at("template_id").get<std::string>();
    const auto category = parse_category(j.at("category").get<std::string>());
    if (!category) fail(ErrorKind::parse, "unknown category in instance " + q.instance_id);
    q.category = *category;
    q.subcategory = j.at("subcategory").get<std::string>();
    const auto type = dsl::parse_answer_type(j.at("answer_type").get<std::string>());
    if (!type) fail(ErrorKind::parse, "unknown answer type in instance " + q.instance_id);
    q.answer_type = *type;
    q.question = j.at("question").get<std::string>();
    q.program = dsl::program_from_json(j.at("program"));
    q.answer = j.at("answer").get<std::string>();
    q.object_ids = j.at("object_ids").get<std::vector<int>>();
    q.split = j.value("split", std::string());
    q.validation = j.value("validation", std::string("pending"));
    return q;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed QA instance: ") + e.what());
  }
}

Instantiation instantiate(const QuestionTemplate& t, const dsl::SimContext& ctx, const std::vector<int>& objects,
                          Rng& rng, const SynonymTable& synonyms) {
  if (static_cast<int>(objects.size()) != t.object_slots) return {std::nullopt, "slot count mismatch"};
  std::vector<ObjectBinding> bindings;
  for (int id : objects) {
    const DynamicObject* d = ctx.scene.find_dynamic(id);
    if (!d) return {std::nullopt, "referenced object absent"};
    bindings.push_back(bind_object(*d));
  }
  if (objects.size() == 2 && objects[0] == objects[1]) return {std::nullopt, "repeated object"};

  const std::string& variant = t.texts[rng.index(t.texts.size())];
  QAInstance q;
  q.question = render_text(variant, bindings, t.verb_class, synonyms, rng);
  q.program = bind_program(t, bindings);
  const auto rendered = dsl::answer(q.program, ctx);
  if (!rendered) return {std::nullopt, "invalid answer"};
  if (dsl::answer_type_of(*rendered) != t.answer_type) return {std::nullopt, "answer type mismatch"};

  if (t.subcategory == "C/A") {
    const auto variation = ctx.counterfactual(objects[0]);
    const auto rel = classify_relation(objects[0], objects[1], ctx.events, *variation, ctx.intentions);
    if (rel.relation == Relation::none) return {std::nullopt, "no causal relation"};
  }

  q.scene_id = ctx.scene.scene_id;
  q.layout_id = ctx.scene.layout_id;
  q.template_id = t.template_id;
  q.category = t.category;
  q.subcategory = t.subcategory;
  q.answer_type = t.answer_type;
  q.answer = *rendered;
  q.object_ids = objects;
  return {std::move(q), {}};
}

Instantiation instantiate(const QuestionTemplate& t, const dsl::SimContext& ctx, Rng& rng,
                          const SynonymTable& synonyms) {
  std::vector<int> ids;
  for (const auto& d : ctx.scene.dynamics) ids.push_back(d.id);
  if (static_cast<int>(ids.size()) < t.object_slots) return {std::nullopt, "not enough objects"};
  std::vector<int> chosen;
  for (int k = 0; k < t.object_slots; ++k) {
    const std::size_t i = rng.index(ids.size());
    chosen.push_back(ids[i]);
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return instantiate(t, ctx, chosen, rng, synonyms);
}

}  // namespace craft

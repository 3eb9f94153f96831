#include <cmath>
#include <map>
#include <set>

#include <doctest.h>

#include "dsl/typecheck.hpp"
#include "error.hpp"
#include "oracle.hpp"
#include "questions.hpp"
#include "support.hpp"

using namespace craft;
using namespace craft::testing;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::internal;
}

bool uses(const dsl::Program& p, const std::string& module) {
  const auto used = dsl::modules_used(p);
  return std::find(used.begin(), used.end(), module) != used.end();
}

SceneSpec two_fallers() {
  SceneSpec s = arena("two-fallers");
  add_basket(s, 8.0, 1.6, 0.8);
  add_dynamic(s, Shape::circle, Size::small, Color::red, {3.0, 3.0});
  add_dynamic(s, Shape::cube, Size::large, Color::blue, {5.5, 2.5});
  return s;
}

}  // namespace

TEST_CASE("the bundled catalog covers every subcategory") {
  const auto& tasks = enumerate_tasks();
  CHECK(tasks.size() == 48);
  std::set<std::string> subs;
  std::set<std::string> ids;
  for (const auto& t : tasks) {
    subs.insert(t.subcategory);
    ids.insert(t.template_id);
    CHECK(category_of_subcategory(t.subcategory) == t.category);
    CHECK(!t.texts.empty());
    if (t.category != Category::descriptive) {
      const bool causal_probe =
          uses(t.skeleton, "GetCounterfactEvents") || uses(t.skeleton, "GetCounterfactEventsList");
      CHECK_MESSAGE(causal_probe, t.template_id);
    }
    if (t.verb_class != VerbClass::none) CHECK(t.category == Category::causal);
  }
  CHECK(subs.size() == 11);
  CHECK(ids.size() == tasks.size());
  CHECK(std::set<std::string>(subcategories().begin(), subcategories().end()) == subs);
}

TEST_CASE("object macros expand to a unique attribute filter chain") {
  const auto text = expand_object_macros("<OBJ>");
  CHECK(text.find("Unique") == 0);
  for (const char* m : {"FilterShape", "FilterColor", "FilterSize", "SceneAtStart"}) {
    CHECK(text.find(m) != std::string::npos);
  }
  CHECK(expand_object_macros("<OBJ2>").find("<C2>") != std::string::npos);
}

TEST_CASE("verb conjugation") {
  CHECK(conjugate("cause", VerbForm::third_person) == "causes");
  CHECK(conjugate("cause", VerbForm::past_participle) == "caused");
  CHECK(conjugate("cause", VerbForm::gerund) == "causing");
  CHECK(conjugate("help", VerbForm::past_participle) == "helped");
  CHECK(conjugate("keep", VerbForm::past_participle) == "kept");
  CHECK(conjugate("hold", VerbForm::past_participle) == "held");
  CHECK(conjugate("block", VerbForm::gerund) == "blocking");
  CHECK(conjugate("allow", VerbForm::base) == "allow");
}

TEST_CASE("rendering fills slots from the synonym table") {
  const ObjectBinding cube{100, Size::small, Color::yellow, Shape::cube};
  const ObjectBinding ball{101, Size::large, Color::red, Shape::circle};

  SUBCASE("no synonyms gives base words") {
    Rng rng(1);
    CHECK(render_text("the <Z> <C> <S> and the <Z2> <C2> <S2>", {cube, ball}, VerbClass::none,
                      SynonymTable::none(), rng) == "the small yellow cube and the large red circle");
  }
  SUBCASE("a single-choice table forces the surface form") {
    SynonymTable t = SynonymTable::none();
    t.words["small"] = {"tiny"};
    t.words["cube"] = {"square"};
    Rng rng(1);
    CHECK(render_text("the <Z> <C> <S>", {cube}, VerbClass::none, t, rng) == "the tiny yellow square");
  }
  SUBCASE("unbound slots are internal errors") {
    Rng rng(1);
    CHECK(kind_of([&] { render_text("the <Z2> thing", {cube}, VerbClass::none, SynonymTable::none(), rng); }) ==
          ErrorKind::internal);
    CHECK(kind_of([&] { render_text("does it <V>", {cube}, VerbClass::none, SynonymTable::none(), rng); }) ==
          ErrorKind::internal);
  }
  SUBCASE("verb slots agree on one drawn verb") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const auto text = render_text("<V>|<V3>|<Ved>|<Ving>", {}, VerbClass::prevent, SynonymTable::defaults(), rng);
      const auto base = text.substr(0, text.find('|'));
      CHECK(text == base + "|" + conjugate(base, VerbForm::third_person) + "|" +
                        conjugate(base, VerbForm::past_participle) + "|" + conjugate(base, VerbForm::gerund));
    }
  }
}

TEST_CASE("each verb class draws only from its own synonyms") {
  const auto syn = SynonymTable::defaults();
  const std::map<VerbClass, std::set<std::string>> expected{
      {VerbClass::cause, {"cause", "stimulate", "trigger"}},
      {VerbClass::enable, {"enable", "help", "allow"}},
      {VerbClass::prevent, {"prevent", "keep", "hold", "block", "hinder"}}};
  Rng rng(11);
  for (const auto& [cls, words] : expected) {
    std::set<std::string> seen;
    for (int i = 0; i < 500; ++i) seen.insert(render_text("<V>", {}, cls, syn, rng));
    CHECK(seen == words);
  }
}

TEST_CASE("synonym draws are uniform") {
  const auto syn = SynonymTable::defaults();
  const ObjectBinding cube{100, Size::small, Color::gray, Shape::cube};
  const int n = 10000;
  Rng rng(2024);
  std::map<std::string, int> shapes;
  std::map<std::string, int> verbs;
  for (int i = 0; i < n; ++i) {
    const auto text = render_text("<S> <V>", {cube}, VerbClass::prevent, syn, rng);
    const auto space = text.find(' ');
    ++shapes[text.substr(0, space)];
    ++verbs[text.substr(space + 1)];
  }
  auto check_uniform = [&](const std::map<std::string, int>& counts, std::size_t k) {
    REQUIRE(counts.size() == k);
    const double p = 1.0 / static_cast<double>(k);
    const double mean = n * p;
    const double sigma = std::sqrt(n * p * (1.0 - p));
    for (const auto& [word, c] : counts) CHECK_MESSAGE(std::abs(c - mean) <= 3.0 * sigma, word);
  };
  check_uniform(shapes, 4);
  check_uniform(verbs, 5);
}

TEST_CASE("instantiation evaluates the bound program") {
  const Run r = run(two_fallers());
  const auto ctx = context(r);
  const oracle::World w(r.scene);
  const auto& cat = bundled_templates();
  Rng rng(5);

  const auto fall = instantiate(cat.find("D/N-V-1"), ctx, {}, rng);
  REQUIRE(fall.instance);
  CHECK(fall.instance->answer == "2");
  CHECK(fall.instance->answer == oracle::answer("D/N-V-1", w, {}));
  CHECK(fall.instance->scene_id == "two-fallers");

  SUBCASE("a pair with no causal relation is rejected") {
    for (const auto& t : enumerate_tasks()) {
      if (t.subcategory != "C/A") continue;
      const auto res = instantiate(t, ctx, {100, 101}, rng);
      CHECK(!res.instance);
      CHECK(!res.rejection.empty());
    }
  }
  SUBCASE("bad bindings are rejected") {
    const auto& t = cat.find("CF/O-1");
    CHECK(instantiate(t, ctx, {100}, rng).rejection == "slot count mismatch");
    CHECK(instantiate(t, ctx, {100, 100}, rng).rejection == "repeated object");
    CHECK(instantiate(t, ctx, {100, 999}, rng).rejection == "referenced object absent");
  }
  SUBCASE("accepted answers agree with the oracle") {
    int accepted = 0;
    for (const auto& t : enumerate_tasks()) {
      for (int k = 0; k < 3; ++k) {
        const auto res = instantiate(t, ctx, rng);
        if (!res.instance) continue;
        ++accepted;
        CHECK_MESSAGE(res.instance->answer == oracle::answer(t.template_id, w, res.instance->object_ids),
                      t.template_id);
        CHECK(dsl::answer_type_of(res.instance->answer) == t.answer_type);
      }
    }
    CHECK(accepted > 20);
  }
}

TEST_CASE("instances round-trip through JSON and re-evaluate") {
  const Run r = run(two_fallers());
  const auto ctx = context(r);
  Rng rng(9);
  int checked = 0;
  for (const auto& t : enumerate_tasks()) {
    const auto res = instantiate(t, ctx, rng);
    if (!res.instance) continue;
    QAInstance q = *res.instance;
    q.instance_id = "q" + std::to_string(checked);
    q.split = "train";
    const auto back = instance_from_json(nlohmann::json::parse(to_json(q).dump()));
    CHECK(back == q);
    CHECK(dsl::answer(back.program, ctx) == q.answer);
    ++checked;
  }
  CHECK(checked > 10);
  CHECK(kind_of([] { instance_from_json(nlohmann::json{{"instance_id", "x"}}); }) == ErrorKind::parse);
}

TEST_CASE("the object reference resolves to the bound object") {
  const Run r = run(two_fallers());
  const auto ctx = context(r);
  const auto ref = dsl::parse_program(expand_object_macros("<OBJ>"));
  for (const auto& d : r.scene.dynamics) {
    const auto b = bind_object(d);
    const auto bound = dsl::substitute(ref, {{"<Z>", std::string(name(b.size))},
                                             {"<C>", std::string(name(b.color))},
                                             {"<S>", std::string(name(b.shape))}});
    const auto typed = dsl::typecheck(bound, {.allow_placeholders = false, .require_output_root = false});
    CHECK(dsl::evaluate(typed, ctx) == dsl::Value(dsl::ObjectRef{d.id}));
  }
}

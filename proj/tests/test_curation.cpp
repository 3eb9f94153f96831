#include <cmath>
#include <map>
#include <set>

#include <doctest.h>

#include "curation.hpp"
#include "error.hpp"
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

QAInstance last_partner_question(const SceneSpec& s) {
  const Run r = run(s);
  const auto ctx = context(r);
  Rng rng(1);
  auto res = instantiate(bundled_templates().find("D/C-1"), ctx, {100}, rng);
  REQUIRE_MESSAGE(res.instance, res.rejection);
  return *res.instance;
}

QAInstance fake(const std::string& scene, int layout, const std::string& tmpl, dsl::AnswerType type,
                const std::string& answer) {
  QAInstance q;
  q.scene_id = scene;
  q.layout_id = layout;
  q.template_id = tmpl;
  q.answer_type = type;
  q.answer = answer;
  q.instance_id = scene + "/" + tmpl + "/" + answer;
  return q;
}

}  // namespace

TEST_CASE("the jitter ladder halves down to the floor") {
  const auto ladder = jitter_ladder({});
  REQUIRE(ladder.size() == 3);
  CHECK(ladder[0].position_jitter == doctest::Approx(0.02));
  CHECK(ladder[1].position_jitter == doctest::Approx(0.01));
  CHECK(ladder[2].position_jitter == doctest::Approx(0.005));

  PerturbationPolicy half = PerturbationPolicy{}.scaled(0.5);
  const auto suffix = jitter_ladder(half);
  REQUIRE(suffix.size() == 2);
  CHECK(suffix[0].angle_jitter == ladder[1].angle_jitter);

  PerturbationPolicy zero = PerturbationPolicy{}.scaled(0.0);
  CHECK(jitter_ladder(zero).size() == 1);

  PerturbationPolicy bad;
  bad.trial_count = 0;
  CHECK(kind_of([&] { bad.check(); }) == ErrorKind::validation);
  bad = {};
  bad.angle_jitter = -1.0;
  CHECK(kind_of([&] { jitter_ladder(bad); }) == ErrorKind::validation);
  bad = {};
  bad.velocity_jitter = NAN;
  CHECK(kind_of([&] { bad.check(); }) == ErrorKind::validation);
}

TEST_CASE("perturbation stays within the jitter bounds") {
  SceneSpec s = arena("perturb");
  add_dynamic(s, Shape::circle, Size::small, Color::red, {3.0, 3.0}, {2.0, -1.0});
  add_dynamic(s, Shape::cube, Size::large, Color::blue, {6.0, 4.0}, {}, 0.3);
  const PerturbationPolicy p;
  for (int trial = 0; trial < 10; ++trial) {
    const SceneSpec q = perturb(s, p, trial);
    CHECK(to_json(q) == to_json(perturb(s, p, trial)));
    REQUIRE(q.dynamics.size() == s.dynamics.size());
    CHECK(to_json(q)["statics"] == to_json(s)["statics"]);
    for (std::size_t i = 0; i < s.dynamics.size(); ++i) {
      const auto& a = s.dynamics[i];
      const auto& b = q.dynamics[i];
      CHECK(std::abs(b.position.x - a.position.x) <= p.position_jitter + 1e-12);
      CHECK(std::abs(b.position.y - a.position.y) <= p.position_jitter + 1e-12);
      CHECK(std::abs(b.angle - a.angle) <= p.angle_jitter + 1e-12);
      const double vx = a.linear_velocity.x;
      CHECK(std::abs(b.linear_velocity.x - vx) <= std::abs(vx) * p.velocity_jitter + 1e-12);
    }
  }
  CHECK(to_json(perturb(s, p, 0)) != to_json(perturb(s, p, 1)));
}

TEST_CASE("knife-edge questions are unstable, robust ones stable") {
  const SceneSpec knife = knife_edge_scene(0.005);
  const QAInstance q = last_partner_question(knife);
  CHECK(q.answer == "blue");
  CHECK(validate_instance(q, knife, {}) == Stability::unstable);
  CHECK(validate_instance(q, knife, PerturbationPolicy{}.scaled(0.0)) == Stability::stable);

  const SceneSpec robust = knife_edge_scene(0.3);
  const QAInstance r = last_partner_question(robust);
  CHECK(r.answer == "blue");
  CHECK(validate_instance(r, robust, {}) == Stability::stable);

  SUBCASE("a video report shares perturbed scenes across its questions") {
    const auto report = validate_video(knife, {q, q}, {});
    REQUIRE(report.results.size() == 2);
    CHECK(report.results[0] == Stability::unstable);
    CHECK(report.results[1] == Stability::unstable);
    CHECK(report.perturbed_scenes <= 30);
    CHECK(report.simulations >= 1);
  }
}

TEST_CASE("balance caps every template's answer distribution") {
  std::vector<QAInstance> all;
  // skewed count template: answer "1" dominates
  const std::map<std::string, int> counts{{"0", 30}, {"1", 200}, {"2", 60}, {"3", 10}};
  int v = 0;
  for (const auto& [a, n] : counts) {
    for (int i = 0; i < n; ++i) all.push_back(fake("v" + std::to_string(v++), 1, "D/N-V-1", dsl::AnswerType::count, a));
  }
  for (int i = 0; i < 300; ++i) {
    all.push_back(fake("b" + std::to_string(i), 1, "D/C-T-1", dsl::AnswerType::boolean, i % 4 ? "True" : "False"));
  }
  for (int i = 0; i < 20; ++i) all.push_back(fake("s" + std::to_string(i), 1, "D/C-1", dsl::AnswerType::color, "red"));

  const auto result = balance(all, {});
  std::map<std::string, std::map<std::string, int>> after;
  for (const auto& q : result.selected) ++after[q.template_id][q.answer];

  const auto& num = after["D/N-V-1"];
  int total = 0;
  int top = 0;
  for (const auto& [a, n] : num) {
    total += n;
    top = std::max(top, n);
  }
  CHECK(num.size() == 4);
  CHECK(static_cast<double>(top) <= 1.25 * total / static_cast<double>(num.size()) + 1e-9);
  CHECK(num.at("3") == 10);

  const auto& yes_no = after["D/C-T-1"];
  const double share = static_cast<double>(yes_no.at("True")) / (yes_no.at("True") + yes_no.at("False"));
  CHECK(share >= 0.45);
  CHECK(share <= 0.55);

  CHECK(after.count("D/C-1") == 0);
  CHECK(result.warnings.size() == 1);

  std::set<std::string> input_ids;
  for (const auto& q : all) input_ids.insert(q.instance_id);
  for (const auto& q : result.selected) CHECK(input_ids.contains(q.instance_id));
  CHECK(balance(all, {}).selected == result.selected);

  CHECK(balance_cap({10, 10}, 1.25) == 10);
  CHECK(balance_cap({100, 10}, 1.0) == 10);
  CHECK(balance_cap({}, 1.25) == 0);
}

TEST_CASE("splits") {
  std::vector<QAInstance> all;
  for (int v = 0; v < 100; ++v) {
    for (int k = 0; k < 3; ++k) {
      all.push_back(fake("video" + std::to_string(v), 1 + v % 20, "T" + std::to_string(k), dsl::AnswerType::boolean,
                         "True"));
    }
  }

  SUBCASE("easy: video-level ratios") {
    const auto out = assign_splits(all, {}, 7);
    std::map<std::string, std::set<std::string>> videos;
    std::map<std::string, std::string> split_of;
    for (const auto& q : out) {
      videos[q.split].insert(q.scene_id);
      const auto [it, fresh] = split_of.emplace(q.scene_id, q.split);
      CHECK(it->second == q.split);
    }
    CHECK(std::abs(static_cast<int>(videos["train"].size()) - 60) <= 1);
    CHECK(std::abs(static_cast<int>(videos["val"].size()) - 20) <= 1);
    CHECK(std::abs(static_cast<int>(videos["test"].size()) - 20) <= 1);
    CHECK(assign_splits(all, {}, 7) == out);
  }
  SUBCASE("hard: layouts are disjoint across splits") {
    SplitConfig c;
    c.mode = SplitMode::hard;
    const auto out = assign_splits(all, c, 7);
    std::map<std::string, std::set<int>> layouts;
    for (const auto& q : out) layouts[q.split].insert(q.layout_id);
    for (int l : layouts["train"]) CHECK(l <= 12);
    for (int l : layouts["val"]) CHECK((l >= 13 && l <= 16));
    for (int l : layouts["test"]) CHECK(l >= 17);
  }
  SUBCASE("bad configurations") {
    SplitConfig c;
    c.train = 0.9;
    c.val = 0.2;
    CHECK(kind_of([&] { c.check(); }) == ErrorKind::validation);
    c = {};
    c.mode = SplitMode::hard;
    c.val_layouts.insert(1);
    CHECK(kind_of([&] { assign_splits(all, c, 1); }) == ErrorKind::validation);
    c = {};
    c.mode = SplitMode::hard;
    c.test_layouts.erase(20);
    CHECK(kind_of([&] { assign_splits(all, c, 1); }) == ErrorKind::validation);
  }
  SUBCASE("configuration JSON") {
    SplitConfig c;
    c.mode = SplitMode::hard;
    const auto back = split_config_from_json(to_json(c));
    CHECK(back.mode == SplitMode::hard);
    CHECK(back.test_layouts == c.test_layouts);
    const auto p = policy_from_json(to_json(PerturbationPolicy{}.scaled(2.0)));
    CHECK(p.position_jitter == doctest::Approx(0.04));
  }
}

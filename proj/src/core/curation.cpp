#include "curation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "error.hpp"

namespace craft {

PerturbationPolicy PerturbationPolicy::scaled(double factor) const {
  PerturbationPolicy p = *this;
  p.position_jitter *= factor;
  p.angle_jitter *= factor;
  p.velocity_jitter *= factor;
  return p;
}

void PerturbationPolicy::check() const {
  if (trial_count < 1) fail(ErrorKind::validation, "perturbation trial_count must be >= 1");
  for (double j : {position_jitter, angle_jitter, velocity_jitter}) {
    if (!std::isfinite(j) || j < 0.0) fail(ErrorKind::validation, "perturbation jitters must be finite and >= 0");
  }
}

std::vector<PerturbationPolicy> jitter_ladder(const PerturbationPolicy& policy) {
  policy.check();
  std::vector<PerturbationPolicy> ladder{policy};
  for (int k = 1; k < 32; ++k) {
    const PerturbationPolicy next = policy.scaled(std::ldexp(1.0, -k));
    if (next.position_jitter < kPositionFloor && next.angle_jitter < kAngleFloor &&
        next.velocity_jitter < kVelocityFloor) {
      break;
    }
    ladder.push_back(next);
  }
  return ladder;
}

namespace {

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

bool clear_of_geometry(const SceneSpec& partial) {
  physics::World probe(partial, physics::SimConfig{});
  return probe.min_separation() >= -physics::kLinearSlop;
}

}  // namespace

SceneSpec perturb(const SceneSpec& scene, const PerturbationPolicy& level, int trial) {
  Rng rng(derive_seed({scene.rng_seed, hash_string(scene.scene_id), bits(level.position_jitter),
                       bits(level.angle_jitter), bits(level.velocity_jitter), static_cast<std::uint64_t>(trial)}));
  SceneSpec out = scene;
  out.dynamics.clear();
  for (const auto& original : scene.dynamics) {
    const double ux = rng.uniform(-1.0, 1.0);
    const double uy = rng.uniform(-1.0, 1.0);
    const double ua = rng.uniform(-1.0, 1.0);
    const double uv = rng.uniform(-1.0, 1.0);
    DynamicObject d = original;
    d.linear_velocity = original.linear_velocity * (1.0 + uv * level.velocity_jitter);
    d.angular_velocity = original.angular_velocity * (1.0 + uv * level.velocity_jitter);
    // Offsets that push into geometry are halved until the placement clears.
    double scale = 1.0;
    for (int attempt = 0; attempt < 8; ++attempt, scale *= 0.5) {
      d.position = original.position + Vec2{ux, uy} * (level.position_jitter * scale);
      d.angle = original.angle + ua * level.angle_jitter * scale;
      out.dynamics.push_back(d);
      if (clear_of_geometry(out)) break;
      out.dynamics.pop_back();
    }
    if (out.dynamics.size() == 0 || out.dynamics.back().id != d.id) {
      d.position = original.position;
      d.angle = original.angle;
      out.dynamics.push_back(d);
    }
  }
  return out;
}

std::string_view name(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

ValidationReport validate_video(const SceneSpec& scene, const std::vector<QAInstance>& instances,
                                const PerturbationPolicy& policy, const physics::SimConfig& config,
                                const EventOptions& events) {
  ValidationReport report;
  report.results.assign(instances.size(), Stability::stable);
  const auto ladder = jitter_ladder(policy);
  report.levels = static_cast<int>(ladder.size());

  std::vector<std::size_t> pending(instances.size());
  for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = i;

  for (const auto& level : ladder) {
    for (int trial = 0; trial < policy.trial_count && !pending.empty(); ++trial) {
      SceneSpec perturbed = perturb(scene, level, trial);
      perturbed.scene_id = scene.scene_id + "~" + std::to_string(bits(level.position_jitter)) + "." +
                           std::to_string(trial);
      ++report.perturbed_scenes;
      auto cache = std::make_shared<VariationCache>(config, false, events);
      dsl::SimContext ctx;
      try {
        const auto trace = physics::simulate(perturbed, config);
        ++report.simulations;
        ctx = dsl::make_context(perturbed, trace, extract_events(trace, perturbed, events), cache);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::simulation && e.kind() != ErrorKind::validation) throw;
        ++report.blowups;
        for (std::size_t i : pending) report.results[i] = Stability::unstable;
        pending.clear();
        break;
      }
      std::vector<std::size_t> still;
      for (std::size_t i : pending) {
        std::optional<std::string> got;
        try {
          got = dsl::answer(instances[i].program, ctx);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::simulation && e.kind() != ErrorKind::validation) throw;
        }
        if (got == instances[i].answer) {
          still.push_back(i);
        } else {
          report.results[i] = Stability::unstable;
        }
      }
      report.simulations += static_cast<int>(cache->simulations());
      pending = std::move(still);
    }
  }
  return report;
}

Stability validate_instance(const QAInstance& instance, const SceneSpec& scene, const PerturbationPolicy& policy,
                            const physics::SimConfig& config, const EventOptions& events) {
  return validate_video(scene, {instance}, policy, config, events).results.front();
}

int balance_cap(const std::vector<int>& counts, double factor) {
  if (counts.empty()) return 0;
  const double k = static_cast<double>(counts.size());
  const int top = *std::max_element(counts.begin(), counts.end());
  for (int c = top; c >= 1; --c) {
    long long kept = 0;
    for (int n : counts) kept += std::min(n, c);
    if (static_cast<double>(c) <= factor * static_cast<double>(kept) / k) return c;
  }
  return 1;
}

namespace {

struct Group {
  std::string template_id;
  dsl::AnswerType type = dsl::AnswerType::boolean;
  std::map<std::string, std::vector<std::size_t>> by_answer;  // instance indices, input order
};

std::map<std::string, int> histogram(const Group& g) {
  std::map<std::string, int> h;
  for (const auto& [a, idx] : g.by_answer) h[a] = static_cast<int>(idx.size());
  return h;
}

bool within_cap(const std::map<std::string, std::vector<std::size_t>>& by_answer, double factor) {
  std::size_t total = 0;
  std::size_t top = 0;
  for (const auto& [a, idx] : by_answer) {
    total += idx.size();
    top = std::max(top, idx.size());
  }
  const double k = static_cast<double>(by_answer.size());
  return static_cast<double>(top) <= factor * static_cast<double>(total) / k + 1e-9;
}

}  // namespace

BalanceResult balance(const std::vector<QAInstance>& instances, const BalanceOptions& options) {
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    Group& g = groups[instances[i].template_id];
    g.template_id = instances[i].template_id;
    g.type = instances[i].answer_type;
    g.by_answer[instances[i].answer].push_back(i);
  }

  BalanceResult result;
  Rng rng(derive_seed({options.seed, hash_string("balance")}));
  for (auto& [id, g] : groups) {
    GroupReport report;
    report.template_id = id;
    report.before = histogram(g);
    if (g.by_answer.size() < 2) {
      report.dropped = true;
      result.warnings.push_back("template " + id + ": single answer value, group dropped");
      g.by_answer.clear();
      result.groups.push_back(std::move(report));
      continue;
    }
    std::vector<int> counts;
    for (const auto& [a, idx] : g.by_answer) counts.push_back(static_cast<int>(idx.size()));
    const int cap = g.type == dsl::AnswerType::boolean ? *std::min_element(counts.begin(), counts.end())
                                                       : balance_cap(counts, options.cap_factor);
    for (auto& [a, idx] : g.by_answer) {
      if (static_cast<int>(idx.size()) > cap) {
        rng.shuffle(idx);
        idx.resize(static_cast<std::size_t>(cap));
        std::sort(idx.begin(), idx.end());
      }
    }
    result.groups.push_back(std::move(report));
  }

  if (options.global_pass) {
    // Trim globally over-represented answers of each non-boolean type, one
    // instance at a time, only where the group stays within its cap.
    for (auto type : {dsl::AnswerType::color, dsl::AnswerType::shape, dsl::AnswerType::count}) {
      std::map<std::string, std::size_t> global;
      std::size_t total = 0;
      for (const auto& [id, g] : groups) {
        if (g.type != type) continue;
        for (const auto& [a, idx] : g.by_answer) {
          global[a] += idx.size();
          total += idx.size();
        }
      }
      if (global.size() < 2) continue;
      const double target = options.cap_factor * static_cast<double>(total) / static_cast<double>(global.size());
      for (auto& [answer, count] : global) {
        for (auto& [id, g] : groups) {
          if (g.type != type) continue;
          auto it = g.by_answer.find(answer);
          if (it == g.by_answer.end()) continue;
          while (static_cast<double>(count) > target && it->second.size() > 1) {
            auto trial = g.by_answer;
            auto& idx = trial[answer];
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(rng.index(idx.size())));
            if (!within_cap(trial, options.cap_factor)) break;
            g.by_answer = std::move(trial);
            it = g.by_answer.find(answer);
            --count;
          }
        }
      }
    }
  }

  std::vector<std::size_t> keep;
  for (auto& report : result.groups) {
    const Group& g = groups.at(report.template_id);
    if (!report.dropped) report.after = histogram(g);
    for (const auto& [a, idx] : g.by_answer) keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  for (std::size_t i : keep) result.selected.push_back(instances[i]);
  return result;
}

std::string_view name(SplitMode m) { return m == SplitMode::easy ? "easy" : "hard"; }

std::optional<SplitMode> parse_split_mode(std::string_view s) {
  if (s == "easy") return SplitMode::easy;
  if (s == "hard") return SplitMode::hard;
  return std::nullopt;
}

void SplitConfig::check() const {
  if (!(train > 0.0) || !(val >= 0.0) || train + val > 1.0) {
    fail(ErrorKind::validation, "split ratios must satisfy train > 0, val >= 0, train + val <= 1");
  }
  if (mode != SplitMode::hard) return;
  auto overlap = [](const std::set<int>& a, const std::set<int>& b) {
    return std::any_of(a.begin(), a.end(), [&](int x) { return b.contains(x); });
  };
  if (overlap(train_layouts, val_layouts) || overlap(train_layouts, test_layouts) ||
      overlap(val_layouts, test_layouts)) {
    fail(ErrorKind::validation, "hard split layout sets overlap");
  }
  if (train_layouts.empty() || test_layouts.empty()) {
    fail(ErrorKind::validation, "hard split needs train and test layouts");
  }
}

std::vector<QAInstance> assign_splits(std::vector<QAInstance> instances, const SplitConfig& config,
                                      std::uint64_t seed) {
  config.check();
  std::map<std::string, std::string> split_of;
  if (config.mode == SplitMode::easy) {
    std::set<std::string> unique;
    for (const auto& q : instances) unique.insert(q.scene_id);
    std::vector<std::string> videos(unique.begin(), unique.end());
    Rng rng(derive_seed({seed, hash_string("split")}));
    rng.shuffle(videos);
    const std::size_t n = videos.size();
    const auto n_train = static_cast<std::size_t>(std::llround(config.train * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(config.val * static_cast<double>(n))));
    for (std::size_t i = 0; i < n; ++i) {
      split_of[videos[i]] = i < n_train ? "train" : i < n_train + n_val ? "val" : "test";
    }
  }
  for (auto& q : instances) {
    if (config.mode == SplitMode::easy) {
      q.split = split_of.at(q.scene_id);
    } else if (config.train_layouts.contains(q.layout_id)) {
      q.split = "train";
    } else if (config.val_layouts.contains(q.layout_id)) {
      q.split = "val";
    } else if (config.test_layouts.contains(q.layout_id)) {
      q.split = "test";
    } else {
      fail(ErrorKind::validation, "layout " + std::to_string(q.layout_id) + " is in no hard split partition");
    }
  }
  return instances;
}

nlohmann::json to_json(const PerturbationPolicy& p) {
  return {{"trial_count", p.trial_count},
          {"position_jitter", p.position_jitter},
          {"angle_jitter", p.angle_jitter},
          {"velocity_jitter", p.velocity_jitter}};
}

PerturbationPolicy policy_from_json(const nlohmann::json& j) {
  PerturbationPolicy p;
  p.trial_count = j.value("trial_count", p.trial_count);
  p.position_jitter = j.value("position_jitter", p.position_jitter);
  p.angle_jitter = j.value("angle_jitter", p.angle_jitter);
  p.velocity_jitter = j.value("velocity_jitter", p.velocity_jitter);
  p.check();
  return p;
}

nlohmann::json to_json(const SplitConfig& c) {
  return {{"mode", name(c.mode)},
          {"train", c.train},
          {"val", c.val},
          {"train_layouts", c.train_layouts},
          {"val_layouts", c.val_layouts},
          {"test_layouts", c.test_layouts}};
}

SplitConfig split_config_from_json(const nlohmann::json& j) {
  SplitConfig c;
  if (j.contains("mode")) {
    const auto mode = parse_split_mode(j.at("mode").get<std::string>());
    if (!mode) fail(ErrorKind::validation, "split mode must be easy or hard");
    c.mode = *mode;
  }
  c.train = j.value("train", c.train);
  c.val = j.value("val", c.val);
  if (j.contains("train_layouts")) c.train_layouts = j.at("train_layouts").get<std::set<int>>();
  if (j.contains("val_layouts")) c.val_layouts = j.at("val_layouts").get<std::set<int>>();
  if (j.contains("test_layouts")) c.test_layouts = j.at("test_layouts").get<std::set<int>>();
  c.check();
  return c;
}

nlohmann::json to_json(const BalanceResult& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"template_id", g.template_id}, {"before", g.before}, {"after", g.after}, {"dropped", g.dropped}});
  }
  return {{"selected", r.selected.size()}, {"groups", std::move(groups)}, {"warnings", r.warnings}};
}

}  // namespace craft

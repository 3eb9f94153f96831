#include "dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "error.hpp"

namespace craft {

std::string object_phrase(const SceneSpec& scene, int object_id) {
  if (const auto* d = scene.find_dynamic(object_id)) {
    return "the " + std::string(name(d->size)) + " " + std::string(name(d->color)) + " " +
           std::string(name(d->shape));
  }
  if (const auto* s = scene.find_static(object_id)) {
    switch (s->kind) {
      case StaticKind::ground: return "the ground";
      case StaticKind::basket: return "the basket";
      default: return "the " + std::string(name(s->kind));
    }
  }
  fail(ErrorKind::argument, "unknown object " + std::to_string(object_id));
}

namespace {

bool narrated_static(const SceneSpec& scene, int id) {
  const auto* s = scene.find_static(id);
  return s && (s->kind == StaticKind::ground || s->kind == StaticKind::basket);
}

std::string capitalised(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

OracleDescription describe(const SceneSpec& scene, const std::vector<Event>& events) {
  std::vector<Event> kept;
  for (const auto& e : events) {
    if (e.type == EventType::touch_start || e.type == EventType::touch_end) continue;
    const bool allowed = std::all_of(e.participants.begin(), e.participants.end(), [&](int id) {
      return scene.find_dynamic(id) != nullptr || narrated_static(scene, id);
    });
    if (allowed) kept.push_back(e);
  }
  std::stable_sort(kept.begin(), kept.end(), event_less);

  OracleDescription d;
  d.scene_id = scene.scene_id;
  for (const auto& e : kept) {
    switch (e.type) {
      case EventType::start:
        d.sentences.push_back("The video starts.");
        break;
      case EventType::end:
        d.sentences.push_back("The video ends.");
        break;
      case EventType::enter_basket:
        d.sentences.push_back(capitalised(object_phrase(scene, e.participants.at(0))) + " enters the basket.");
        break;
      case EventType::collision: {
        int a = e.participants.at(0);
        int b = e.participants.at(1);
        if (!scene.find_dynamic(a)) std::swap(a, b);
        const auto* other = scene.find_static(b);
        if (other && other->kind == StaticKind::ground) {
          d.sentences.push_back(capitalised(object_phrase(scene, a)) + " falls to the ground.");
        } else {
          d.sentences.push_back(capitalised(object_phrase(scene, a)) + " collides with " + object_phrase(scene, b) + ".");
        }
        break;
      }
      default:
        break;
    }
  }
  for (const auto& s : d.sentences) d.text += (d.text.empty() ? "" : " ") + s;
  return d;
}

nlohmann::json to_json(const OracleDescription& d) {
  return {{"scene_id", d.scene_id}, {"sentences", d.sentences}, {"text", d.text}};
}

std::vector<QAInstance> read_instances(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) fail(ErrorKind::io, "cannot open " + jsonl.string());
  std::vector<QAInstance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(instance_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse, jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_instances(const std::filesystem::path& jsonl, const std::vector<QAInstance>& instances) {
  if (jsonl.has_parent_path()) std::filesystem::create_directories(jsonl.parent_path());
  std::ofstream out(jsonl, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + jsonl.string());
  for (const auto& q : instances) out << to_json(q).dump() << '\n';
  if (!out) fail(ErrorKind::io, "write failed for " + jsonl.string());
}

std::map<std::string, std::vector<QAInstance>> read_dataset(const std::filesystem::path& dataset_dir) {
  std::map<std::string, std::vector<QAInstance>> out;
  for (const char* split : {"train", "val", "test"}) {
    const auto path = dataset_dir / (std::string(split) + ".jsonl");
    if (std::filesystem::exists(path)) out[split] = read_instances(path);
  }
  if (out.empty()) fail(ErrorKind::io, "no split files in " + dataset_dir.string());
  return out;
}

nlohmann::json dataset_stats(const std::vector<QAInstance>& instances) {
  nlohmann::json nested = nlohmann::json::object();
  std::map<std::string, int> categories, answer_types, splits, layouts, subcategories;
  std::map<std::string, int> videos_per_layout;
  std::map<std::string, std::set<std::string>> layout_videos;
  for (const auto& q : instances) {
    const std::string cat(name(q.category));
    const std::string type(dsl::name(q.answer_type));
    ++categories[cat];
    ++answer_types[type];
    ++subcategories[q.subcategory];
    ++splits[q.split.empty() ? "unassigned" : q.split];
    ++layouts[std::to_string(q.layout_id)];
    layout_videos[std::to_string(q.layout_id)].insert(q.scene_id);
    auto& slot = nested[cat][type][q.answer];
    slot = slot.is_null() ? 1 : slot.get<int>() + 1;
  }
  for (const auto& [layout, vids] : layout_videos) videos_per_layout[layout] = static_cast<int>(vids.size());
  const double total = static_cast<double>(instances.size());
  auto shares = [&](const std::map<std::string, int>& counts) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : counts) j[k] = total > 0 ? 100.0 * v / total : 0.0;
    return j;
  };
  return {{"questions", instances.size()},
          {"categories", categories},
          {"category_percent", shares(categories)},
          {"answer_types", answer_types},
          {"answer_type_percent", shares(answer_types)},
          {"subcategories", subcategories},
          {"answers", nested},
          {"splits", splits},
          {"questions_per_layout", layouts},
          {"videos_per_layout", videos_per_layout}};
}

std::string_view name(Baseline b) {
  switch (b) {
    case Baseline::random: return "Random";
    case Baseline::at_random: return "AT-Random";
    case Baseline::mfa: return "MFA";
    case Baseline::at_mfa: return "AT-MFA";
  }
  return "?";
}

std::optional<Baseline> parse_baseline(std::string_view s) {
  for (auto b : {Baseline::random, Baseline::at_random, Baseline::mfa, Baseline::at_mfa}) {
    if (name(b) == s) return b;
  }
  return std::nullopt;
}

TrainStats train_stats(const std::vector<QAInstance>& train) {
  TrainStats s;
  for (const auto& q : train) {
    ++s.answers[q.answer];
    ++s.by_type[q.answer_type][q.answer];
  }
  s.size = train.size();
  return s;
}

namespace {

/// Most frequent answer; ties go to the earlier vocabulary entry.
std::string mode_of(const std::map<std::string, int>& counts) {
  const auto& vocab = dsl::answer_vocabulary();
  std::string best;
  int best_count = -1;
  for (const auto& a : vocab) {
    const auto it = counts.find(a);
    if (it != counts.end() && it->second > best_count) {
      best = a;
      best_count = it->second;
    }
  }
  return best;
}

}  // namespace

HeuristicModel::HeuristicModel(Baseline kind, TrainStats stats, std::uint64_t seed)
    : kind_(kind), stats_(std::move(stats)), rng_(derive_seed({seed, hash_string(std::string(name(kind)))})) {
  if ((kind_ == Baseline::mfa || kind_ == Baseline::at_mfa) && stats_.size == 0) {
    fail(ErrorKind::argument, std::string(name(kind_)) + " needs non-empty train statistics");
  }
  global_mode_ = mode_of(stats_.answers);
  for (const auto& [type, counts] : stats_.by_type) type_mode_[type] = mode_of(counts);
}

std::string HeuristicModel::answer(const QAInstance& q) {
  switch (kind_) {
    case Baseline::random: {
      const auto& vocab = dsl::answer_vocabulary();
      return vocab[rng_.index(vocab.size())];
    }
    case Baseline::at_random: {
      const auto options = dsl::answers_of_type(q.answer_type);
      return options[rng_.index(options.size())];
    }
    case Baseline::mfa:
      return global_mode_;
    case Baseline::at_mfa: {
      const auto it = type_mode_.find(q.answer_type);
      // Types unseen in training fall back to their first vocabulary entry.
      return it != type_mode_.end() ? it->second : dsl::answers_of_type(q.answer_type).front();
    }
  }
  return {};
}

BaselineResult run_baseline(Baseline kind, const std::vector<QAInstance>& train, const std::vector<QAInstance>& eval,
                            std::uint64_t seed) {
  HeuristicModel model(kind, train_stats(train), seed);
  BaselineResult r;
  r.kind = kind;
  std::map<std::string, std::pair<int, int>> cat, sub;
  int correct = 0;
  for (const auto& q : eval) {
    const bool ok = model.answer(q) == q.answer;
    correct += ok;
    auto& c = cat[std::string(name(q.category))];
    c.first += ok;
    ++c.second;
    auto& s = sub[q.subcategory];
    s.first += ok;
    ++s.second;
  }
  r.evaluated = eval.size();
  r.accuracy = eval.empty() ? 0.0 : 100.0 * correct / static_cast<double>(eval.size());
  for (const auto& [k, v] : cat) r.per_category[k] = 100.0 * v.first / v.second;
  for (const auto& [k, v] : sub) r.per_subcategory[k] = 100.0 * v.first / v.second;
  return r;
}

nlohmann::json to_json(const BaselineResult& r) {
  return {{"model", name(r.kind)},
          {"evaluated", r.evaluated},
          {"accuracy", r.accuracy},
          {"per_category", r.per_category},
          {"per_subcategory", r.per_subcategory}};
}

}  // namespace craft

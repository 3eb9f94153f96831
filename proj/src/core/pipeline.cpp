#include "pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "digest.hpp"
#include "render.hpp"
#include "trace_io.hpp"

namespace craft {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys{
    "videos",  "questions_per_video", "seed",       "layouts",        "duration",
    "collision_speed", "sample_attempts", "perturbation", "balance", "split",
    "render",  "fps",   "resolution", "export_variation_traces", "precompute_variations",
    "catalog", "templates", "jobs"};

}  // namespace

PipelineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::validation, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.contains(key)) fail(ErrorKind::validation, "unknown config key: " + key);
  }
  PipelineConfig c;
  try {
    c.videos = j.value("videos", c.videos);
    c.questions_per_video = j.value("questions_per_video", c.questions_per_video);
    c.seed = j.value("seed", c.seed);
    c.layouts = j.value("layouts", c.layouts);
    c.duration = j.value("duration", c.duration);
    c.collision_speed = j.value("collision_speed", c.collision_speed);
    c.sample_attempts = j.value("sample_attempts", c.sample_attempts);
    if (j.contains("perturbation")) c.perturbation = policy_from_json(j.at("perturbation"));
    if (j.contains("balance")) {
      const auto& b = j.at("balance");
      c.balance.cap_factor = b.value("cap_factor", c.balance.cap_factor);
      c.balance.global_pass = b.value("global_pass", c.balance.global_pass);
    }
    if (j.contains("split")) c.split = split_config_from_json(j.at("split"));
    c.render = j.value("render", c.render);
    c.fps = j.value("fps", c.fps);
    c.resolution = j.value("resolution", c.resolution);
    c.export_variation_traces = j.value("export_variation_traces", c.export_variation_traces);
    c.precompute_variations = j.value("precompute_variations", c.precompute_variations);
    c.catalog_path = j.value("catalog", c.catalog_path);
    c.templates_path = j.value("templates", c.templates_path);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::validation, std::string("bad config value: ") + e.what());
  }
  if (c.videos < 1) fail(ErrorKind::validation, "videos must be >= 1");
  if (c.questions_per_video < 0) fail(ErrorKind::validation, "questions_per_video must be >= 0");
  if (!(c.duration > 0.0)) fail(ErrorKind::validation, "duration must be positive");
  if (!(c.collision_speed >= 0.0)) fail(ErrorKind::validation, "collision_speed must be >= 0");
  if (c.sample_attempts < 1) fail(ErrorKind::validation, "sample_attempts must be >= 1");
  if (c.fps < 1 || c.resolution < 1) fail(ErrorKind::validation, "fps and resolution must be positive");
  if (c.jobs < 1) fail(ErrorKind::validation, "jobs must be >= 1");
  if (!(c.balance.cap_factor >= 1.0)) fail(ErrorKind::validation, "balance cap_factor must be >= 1");
  return c;
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"videos", c.videos},
          {"questions_per_video", c.questions_per_video},
          {"seed", c.seed},
          {"layouts", c.layouts},
          {"duration", c.duration},
          {"collision_speed", c.collision_speed},
          {"sample_attempts", c.sample_attempts},
          {"perturbation", to_json(c.perturbation)},
          {"balance", {{"cap_factor", c.balance.cap_factor}, {"global_pass", c.balance.global_pass}}},
          {"split", to_json(c.split)},
          {"render", c.render},
          {"fps", c.fps},
          {"resolution", c.resolution},
          {"export_variation_traces", c.export_variation_traces},
          {"precompute_variations", c.precompute_variations},
          {"catalog", c.catalog_path},
          {"templates", c.templates_path}};
}

std::string_view name(Stage s) {
  switch (s) {
    case Stage::generate: return "generate";
    case Stage::validate: return "validate";
    case Stage::balance: return "balance";
    case Stage::split: return "split";
    case Stage::exported: return "export";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : {Stage::generate, Stage::validate, Stage::balance, Stage::split, Stage::exported}) {
    if (name(st) == s) return st;
  }
  return std::nullopt;
}

StageError::StageError(Stage stage, ErrorKind cause, const std::string& message)
    : Error(ErrorKind::stage, "stage " + std::string(name(stage)) + ": " + message), stage_(stage), cause_(cause) {}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

physics::SimulationTrace read_trace(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  return read_trace_jsonl(in);
}

physics::SimConfig sim_config(const PipelineConfig& c) {
  physics::SimConfig s;
  s.duration = c.duration;
  return s;
}

EventOptions event_options(const PipelineConfig& c) { return EventOptions{c.collision_speed}; }

std::string video_id(std::size_t index, int layout) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%05zu-L%02d", index, layout);
  return buf;
}

struct VideoOutcome {
  std::string scene_id;
  int layout_id = 0;
  int dynamics = 0;
  int sample_attempts = 0;
  int variations = 0;
  std::vector<QAInstance> instances;
  std::map<std::string, int> rejections;
  bool skipped = false;
  std::string skip_reason;
};

nlohmann::json outcome_json(const VideoOutcome& v) {
  return {{"scene_id", v.scene_id},   {"layout_id", v.layout_id},         {"dynamics", v.dynamics},
          {"attempts", v.sample_attempts}, {"variations", v.variations}, {"questions", v.instances.size()},
          {"rejections", v.rejections}, {"skipped", v.skipped},           {"skip_reason", v.skip_reason}};
}

/// Groups instances by scene_id, keeping first-appearance order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> by_video(const std::vector<QAInstance>& qs) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    auto [it, fresh] = where.emplace(qs[i].scene_id, out.size());
    if (fresh) out.push_back({qs[i].scene_id, {}});
    out[it->second].second.push_back(i);
  }
  return out;
}

}  // namespace

SceneSpec read_scene(const fs::path& video_dir) { return scene_from_json(read_json(video_dir / "scene.json")); }

CausalGraph read_graph(const fs::path& video_dir) { return graph_from_json(read_json(video_dir / "graph.json")); }

dsl::SimContext read_context(const fs::path& video_dir) {
  const SceneSpec scene = read_scene(video_dir);
  const auto trace = read_trace(video_dir / "trace.jsonl");
  dsl::SimContext ctx = dsl::make_context(scene, trace, read_graph(video_dir).events, nullptr);
  auto variations = std::make_shared<std::map<int, std::shared_ptr<const Variation>>>();
  if (fs::exists(video_dir / "variations")) {
    for (const auto& entry : fs::directory_iterator(video_dir / "variations")) {
      const std::string file = entry.path().filename().string();
      if (!file.ends_with(".graph.json")) continue;
      auto v = std::make_shared<Variation>();
      v->removed_id = std::stoi(file.substr(0, file.find('.')));
      v->graph = graph_from_json(read_json(entry.path()));
      (*variations)[v->removed_id] = std::move(v);
    }
  }
  const std::string dir = video_dir.string();
  ctx.counterfactual = [variations, dir](int removed) -> std::shared_ptr<const Variation> {
    const auto it = variations->find(removed);
    if (it == variations->end()) {
      fail(ErrorKind::evaluation, "variation without object " + std::to_string(removed) + " not exported in " + dir);
    }
    return it->second;
  };
  return ctx;
}

Pipeline::Pipeline(PipelineConfig config, fs::path out) : config_(std::move(config)), out_(std::move(out)) {}

void Pipeline::stage(Stage s, const std::function<void(const fs::path& staging)>& body) {
  const fs::path staging = out_ / (".staging-" + std::string(name(s)));
  try {
    fs::create_directories(out_);
    fs::remove_all(staging);
    fs::create_directories(staging);
    body(staging);
  } catch (const StageError&) {
    fs::remove_all(staging);
    throw;
  } catch (const Error& e) {
    fs::remove_all(staging);
    throw StageError(s, e.kind(), e.what());
  } catch (const std::exception& e) {
    fs::remove_all(staging);
    throw StageError(s, ErrorKind::internal, e.what());
  }
  // Promote staged outputs; videos/ and dataset/ are replaced wholesale.
  for (const auto& entry : fs::directory_iterator(staging)) {
    const fs::path target = out_ / entry.path().filename();
    const std::string top = entry.path().filename().string();
    if (top == "videos" || top == "dataset" || !entry.is_directory()) {
      fs::remove_all(target);
      fs::rename(entry.path(), target);
    } else {
      fs::create_directories(target);
      for (const auto& inner : fs::directory_iterator(entry.path())) {
        fs::remove_all(target / inner.path().filename());
        fs::rename(inner.path(), target / inner.path().filename());
      }
    }
  }
  fs::remove_all(staging);
}

void Pipeline::generate() {
  stage(Stage::generate, [&](const fs::path& staging) {
    const Catalog catalog = config_.catalog_path.empty() ? load_bundled_catalog() : catalog_load(config_.catalog_path);
    const TemplateCatalog templates =
        config_.templates_path.empty() ? bundled_templates() : load_templates(config_.templates_path);
    std::vector<int> layouts = config_.layouts.empty() ? catalog.layout_ids() : config_.layouts;
    for (int id : layouts) catalog.layout(id);
    const auto sim = sim_config(config_);
    const auto evopts = event_options(config_);

    std::vector<VideoOutcome> outcomes(static_cast<std::size_t>(config_.videos));
    parallel_for(outcomes.size(), config_.jobs, [&](std::size_t i) {
      VideoOutcome& v = outcomes[i];
      v.layout_id = layouts[i % layouts.size()];
      v.scene_id = video_id(i, v.layout_id);
      SceneSpec scene;
      std::optional<physics::SimulationTrace> trace;
      for (int attempt = 0; attempt < config_.sample_attempts && !trace; ++attempt) {
        v.sample_attempts = attempt + 1;
        try {
          scene = sample_scene(catalog, v.layout_id, derive_seed({config_.seed, i, static_cast<std::uint64_t>(attempt)}));
          scene.scene_id = v.scene_id;
          trace = physics::simulate(scene, sim);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::sampling && e.kind() != ErrorKind::simulation &&
              e.kind() != ErrorKind::validation) {
            throw;
          }
          v.skip_reason = e.what();
        }
      }
      if (!trace) {
        v.skipped = true;
        return;
      }
      v.skip_reason.clear();
      v.dynamics = static_cast<int>(scene.dynamics.size());
      const CausalGraph graph = build_causal_graph(extract_events(*trace, scene, evopts));
      auto cache = std::make_shared<VariationCache>(sim, config_.export_variation_traces, evopts);
      const dsl::SimContext ctx = dsl::make_context(scene, *trace, graph.events, cache);
      if (config_.precompute_variations) compute_variation_set(scene, *cache);

      Rng rng(derive_seed({config_.seed, i, hash_string("questions")}));
      std::set<std::pair<std::string, std::vector<int>>> seen;
      const auto& pool = templates.templates;
      for (int tries = 0; tries < config_.questions_per_video * 20 &&
                          static_cast<int>(v.instances.size()) < config_.questions_per_video;
           ++tries) {
        const QuestionTemplate& t = pool[rng.index(pool.size())];
        Instantiation r = instantiate(t, ctx, rng);
        if (!r.instance) {
          ++v.rejections[r.rejection];
          continue;
        }
        if (!seen.insert({t.template_id, r.instance->object_ids}).second) {
          ++v.rejections["duplicate"];
          continue;
        }
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "-q%02zu", v.instances.size());
        r.instance->instance_id = v.scene_id + suffix;
        v.instances.push_back(std::move(*r.instance));
      }

      const fs::path dir = staging / "videos" / v.scene_id;
      write_text(dir / "scene.json", to_json(scene).dump(2) + "\n");
      write_text(dir / "trace.jsonl", trace_to_jsonl(*trace));
      write_text(dir / "graph.json", to_json(graph).dump() + "\n");
      write_text(dir / "description.json", to_json(describe(scene, graph.events)).dump(2) + "\n");
      const auto variations = cache->entries();
      v.variations = static_cast<int>(variations.size());
      for (const auto& var : variations) {
        const std::string stem = std::to_string(var->removed_id);
        write_text(dir / "variations" / (stem + ".graph.json"), to_json(var->graph).dump() + "\n");
        if (config_.export_variation_traces && var->trace) {
          write_text(dir / "variations" / (stem + ".trace.jsonl"), trace_to_jsonl(*var->trace));
        }
      }
      if (config_.render) {
        const auto frames = render_frames(scene, *trace, config_.fps, config_.resolution);
        fs::create_directories(dir / "frames");
        for (std::size_t f = 0; f < frames.size(); ++f) {
          char file[32];
          std::snprintf(file, sizeof file, "frame_%03zu.png", f);
          write_png(dir / "frames" / file, frames[f]);
        }
      }
    });

    std::vector<QAInstance> all;
    nlohmann::json videos = nlohmann::json::array();
    std::map<std::string, int> rejections;
    int skipped = 0;
    for (const auto& v : outcomes) {
      all.insert(all.end(), v.instances.begin(), v.instances.end());
      videos.push_back(outcome_json(v));
      for (const auto& [reason, n] : v.rejections) rejections[reason] += n;
      skipped += v.skipped;
    }
    write_instances(staging / "stages" / "generated.jsonl", all);
    nlohmann::json report{{"videos", outcomes.size() - static_cast<std::size_t>(skipped)},
                          {"skipped_videos", skipped},
                          {"questions", all.size()},
                          {"rejections", rejections},
                          {"catalog_version", catalog.catalog_version},
                          {"templates_version", templates.version},
                          {"per_video", std::move(videos)}};
    write_text(staging / "stages" / "generate_report.json", report.dump(2) + "\n");
    // Downstream outputs are stale once videos change.
    for (const char* stale : {"validated.jsonl", "validate_report.json", "balanced.jsonl", "balance_report.json",
                              "split.jsonl", "split_report.json"}) {
      fs::remove(out_ / "stages" / stale);
    }
    fs::remove_all(out_ / "dataset");
    fs::remove(out_ / "manifest.json");
  });
}

void Pipeline::validate() {
  stage(Stage::validate, [&](const fs::path& staging) {
    std::vector<QAInstance> all = read_instances(out_ / "stages" / "generated.jsonl");
    const auto groups = by_video(all);
    const auto sim = sim_config(config_);
    const auto evopts = event_options(config_);
    std::vector<ValidationReport> reports(groups.size());
    parallel_for(groups.size(), config_.jobs, [&](std::size_t g) {
      const auto& [scene_id, idx] = groups[g];
      const SceneSpec scene = read_scene(out_ / "videos" / scene_id);
      std::vector<QAInstance> subset;
      for (std::size_t i : idx) subset.push_back(all[i]);
      reports[g] = validate_video(scene, subset, config_.perturbation, sim, evopts);
    });
    int stable = 0, perturbed = 0, sims = 0, blowups = 0;
    std::map<std::string, std::map<std::string, int>> per_template;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& idx = groups[g].second;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        QAInstance& q = all[idx[k]];
        q.validation = std::string(name(reports[g].results[k]));
        stable += reports[g].results[k] == Stability::stable;
        ++per_template[q.template_id][q.validation];
      }
      perturbed += reports[g].perturbed_scenes;
      sims += reports[g].simulations;
      blowups += reports[g].blowups;
    }
    write_instances(staging / "stages" / "validated.jsonl", all);
    const double rate = all.empty() ? 1.0 : static_cast<double>(stable) / static_cast<double>(all.size());
    nlohmann::json report{{"questions", all.size()},
                          {"stable", stable},
                          {"unstable", all.size() - static_cast<std::size_t>(stable)},
                          {"survival_rate", rate},
                          {"policy", to_json(config_.perturbation)},
                          {"ladder_levels", jitter_ladder(config_.perturbation).size()},
                          {"perturbed_scenes", perturbed},
                          {"simulations", sims},
                          {"blowups", blowups},
                          {"per_template", per_template}};
    write_text(staging / "stages" / "validate_report.json", report.dump(2) + "\n");
  });
}

void Pipeline::balance() {
  stage(Stage::balance, [&](const fs::path& staging) {
    std::vector<QAInstance> stable;
    for (auto& q : read_instances(out_ / "stages" / "validated.jsonl")) {
      if (q.validation == "stable") stable.push_back(std::move(q));
    }
    BalanceOptions options = config_.balance;
    options.seed = config_.seed;
    const BalanceResult result = craft::balance(stable, options);
    write_instances(staging / "stages" / "balanced.jsonl", result.selected);
    nlohmann::json report = to_json(result);
    report["input"] = stable.size();
    write_text(staging / "stages" / "balance_report.json", report.dump(2) + "\n");
  });
}

void Pipeline::split() {
  stage(Stage::split, [&](const fs::path& staging) {
    const auto tagged = assign_splits(read_instances(out_ / "stages" / "balanced.jsonl"), config_.split, config_.seed);
    write_instances(staging / "stages" / "split.jsonl", tagged);
    std::map<std::string, std::set<std::string>> videos;
    std::map<std::string, std::set<int>> layouts;
    std::map<std::string, int> questions;
    for (const auto& q : tagged) {
      videos[q.split].insert(q.scene_id);
      layouts[q.split].insert(q.layout_id);
      ++questions[q.split];
    }
    nlohmann::json report{{"config", to_json(config_.split)}, {"questions", questions}};
    for (const auto& [split, vids] : videos) {
      report["videos"][split] = vids.size();
      report["layouts"][split] = layouts[split];
    }
    write_text(staging / "stages" / "split_report.json", report.dump(2) + "\n");
  });
}

nlohmann::json Pipeline::export_dataset() {
  nlohmann::json manifest;
  stage(Stage::exported, [&](const fs::path& staging) {
    const auto tagged = read_instances(out_ / "stages" / "split.jsonl");
    std::map<std::string, std::vector<QAInstance>> splits{{"train", {}}, {"val", {}}, {"test", {}}};
    for (const auto& q : tagged) splits.at(q.split).push_back(q);
    for (const auto& [split, qs] : splits) write_instances(staging / "dataset" / (split + ".jsonl"), qs);

    nlohmann::json counts;
    for (const auto& [split, qs] : splits) {
      std::set<std::string> vids;
      std::map<std::string, int> cats;
      for (const auto& q : qs) {
        vids.insert(q.scene_id);
        ++cats[std::string(name(q.category))];
      }
      counts[split] = {{"questions", qs.size()}, {"videos", vids.size()}, {"categories", cats}};
    }

    // Digest every file that will exist after promotion, in path order.
    std::map<std::string, fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(out_)) {
      if (!e.is_regular_file()) continue;
      const std::string rel = fs::relative(e.path(), out_).generic_string();
      if (rel.starts_with(".staging-") || rel == "manifest.json" || rel.starts_with("dataset/")) continue;
      files[rel] = e.path();
    }
    for (const auto& e : fs::recursive_directory_iterator(staging)) {
      if (e.is_regular_file()) files[fs::relative(e.path(), staging).generic_string()] = e.path();
    }
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& [rel, path] : files) {
      listing.push_back({{"path", rel}, {"sha256", sha256_file(path)}, {"bytes", fs::file_size(path)}});
    }
    const nlohmann::json report = read_json(out_ / "stages" / "generate_report.json");
    manifest = {{"version", kDatasetVersion},
                {"engine_version", physics::kEngineVersion},
                {"catalog_version", report.at("catalog_version")},
                {"templates_version", report.at("templates_version")},
                {"answer_vocabulary", dsl::kVocabularyVersion},
                {"seed", config_.seed},
                {"config", to_json(config_)},
                {"counts", counts},
                {"files", std::move(listing)}};
    write_text(staging / "manifest.json", manifest.dump(2) + "\n");
  });
  return manifest;
}

void Pipeline::run(Stage s) {
  switch (s) {
    case Stage::generate: generate(); break;
    case Stage::validate: validate(); break;
    case Stage::balance: balance(); break;
    case Stage::split: split(); break;
    case Stage::exported: export_dataset(); break;
  }
}

nlohmann::json Pipeline::run_all() {
  generate();
  validate();
  balance();
  split();
  return export_dataset();
}

}  // namespace craft

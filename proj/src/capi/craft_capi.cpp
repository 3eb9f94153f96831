#include "craft/craft.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "catalog.hpp"
#include "dataset.hpp"
#include "dsl/evaluate.hpp"
#include "dsl/typecheck.hpp"
#include "events.hpp"
#include "pipeline.hpp"
#include "render.hpp"
#include "trace_io.hpp"

struct craft_pipeline {
  craft::Pipeline pipeline;
  std::optional<craft::Stage> failed;
  craft_status cause = CRAFT_OK;
};

struct craft_scene {
  craft::SceneSpec scene;
};

struct craft_trace {
  craft::SceneSpec scene;
  craft::physics::SimulationTrace trace;
};

namespace {

thread_local std::string last_error;

craft_status status_of(craft::ErrorKind k) {
  switch (k) {
    case craft::ErrorKind::argument: return CRAFT_E_ARGUMENT;
    case craft::ErrorKind::io: return CRAFT_E_IO;
    case craft::ErrorKind::parse: return CRAFT_E_PARSE;
    case craft::ErrorKind::validation: return CRAFT_E_VALIDATION;
    case craft::ErrorKind::simulation: return CRAFT_E_SIMULATION;
    case craft::ErrorKind::sampling: return CRAFT_E_SAMPLING;
    case craft::ErrorKind::type: return CRAFT_E_TYPE;
    case craft::ErrorKind::evaluation: return CRAFT_E_EVALUATION;
    case craft::ErrorKind::stage: return CRAFT_E_STAGE;
    case craft::ErrorKind::internal: return CRAFT_E_INTERNAL;
  }
  return CRAFT_E_INTERNAL;
}

craft_status set_error(craft_status s, const std::string& message) {
  last_error = message;
  return s;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
craft_status guard(F&& body) {
  try {
    body();
    return CRAFT_OK;
  } catch (const craft::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(CRAFT_E_PARSE, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(CRAFT_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CRAFT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CRAFT_E_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) craft::fail(craft::ErrorKind::argument, what);
}

craft::physics::SimConfig sim_config(double duration) {
  craft::physics::SimConfig cfg;
  cfg.duration = duration;
  return cfg;
}

}  // namespace

extern "C" {

const char* craft_version(void) { return "1.0.0"; }

const char* craft_engine_version(void) { return craft::physics::kEngineVersion; }

const char* craft_status_name(craft_status status) {
  switch (status) {
    case CRAFT_OK: return "ok";
    case CRAFT_E_ARGUMENT: return "argument";
    case CRAFT_E_IO: return "io";
    case CRAFT_E_PARSE: return "parse";
    case CRAFT_E_VALIDATION: return "validation";
    case CRAFT_E_SIMULATION: return "simulation";
    case CRAFT_E_SAMPLING: return "sampling";
    case CRAFT_E_TYPE: return "type";
    case CRAFT_E_EVALUATION: return "evaluation";
    case CRAFT_E_STAGE: return "stage";
    case CRAFT_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* craft_last_error(void) { return last_error.c_str(); }

void craft_string_free(char* s) { std::free(s); }

craft_status craft_pipeline_create(const char* config_json, const char* out_dir, craft_pipeline** out) {
  return guard([&] {
    require(out_dir && out, "out_dir and out must not be NULL");
    *out = nullptr;
    craft::PipelineConfig cfg;
    if (config_json && *config_json) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(config_json);
      } catch (const nlohmann::json::exception& e) {
        craft::fail(craft::ErrorKind::parse, std::string("config: ") + e.what());
      }
      cfg = craft::config_from_json(j);
    }
    *out = new craft_pipeline{craft::Pipeline(std::move(cfg), out_dir), std::nullopt, CRAFT_OK};
  });
}

void craft_pipeline_destroy(craft_pipeline* p) { delete p; }

craft_status craft_pipeline_run(craft_pipeline* p, const char* stage) {
  return guard([&] {
    require(p && stage, "pipeline and stage must not be NULL");
    p->failed.reset();
    p->cause = CRAFT_OK;
    const std::string s = stage;
    const auto parsed = craft::parse_stage(s);
    require(s == "all" || parsed.has_value(), "unknown stage");
    try {
      if (s == "all") {
        p->pipeline.run_all();
      } else {
        p->pipeline.run(*parsed);
      }
    } catch (const craft::StageError& e) {
      p->failed = e.stage();
      p->cause = status_of(e.cause());
      throw;
    }
  });
}

const char* craft_pipeline_failed_stage(const craft_pipeline* p, craft_status* cause) {
  if (!p || !p->failed) return nullptr;
  if (cause) *cause = p->cause;
  return craft::name(*p->failed).data();
}

craft_status craft_pipeline_config(const craft_pipeline* p, char** json) {
  return guard([&] {
    require(p && json, "pipeline and json must not be NULL");
    *json = dup(craft::to_json(p->pipeline.config()).dump(2));
  });
}

craft_status craft_pipeline_manifest(const craft_pipeline* p, char** json) {
  return guard([&] {
    require(p && json, "pipeline and json must not be NULL");
    *json = dup(craft::read_text(p->pipeline.out() / "manifest.json"));
  });
}

craft_status craft_scene_sample(const char* catalog_path, int layout_id, uint64_t seed, craft_scene** out) {
  return guard([&] {
    require(out, "out must not be NULL");
    *out = nullptr;
    const craft::Catalog catalog = catalog_path ? craft::catalog_load(catalog_path) : craft::load_bundled_catalog();
    *out = new craft_scene{craft::sample_scene(catalog, layout_id, seed)};
  });
}

craft_status craft_scene_from_json(const char* json, craft_scene** out) {
  return guard([&] {
    require(json && out, "json and out must not be NULL");
    *out = nullptr;
    *out = new craft_scene{craft::scene_from_json(nlohmann::json::parse(json))};
  });
}

craft_status craft_scene_to_json(const craft_scene* s, char** json) {
  return guard([&] {
    require(s && json, "scene and json must not be NULL");
    *json = dup(craft::to_json(s->scene).dump(2));
  });
}

void craft_scene_destroy(craft_scene* s) { delete s; }

craft_status craft_simulate(const craft_scene* s, double duration, craft_trace** out) {
  return guard([&] {
    require(s && out, "scene and out must not be NULL");
    require(duration > 0.0, "duration must be positive");
    *out = nullptr;
    auto t = std::make_unique<craft_trace>();
    t->scene = s->scene;
    t->trace = craft::physics::simulate(s->scene, sim_config(duration));
    *out = t.release();
  });
}

craft_status craft_trace_tick_count(const craft_trace* t, int* ticks) {
  return guard([&] {
    require(t && ticks, "trace and ticks must not be NULL");
    *ticks = t->trace.tick_count;
  });
}

craft_status craft_trace_to_jsonl(const craft_trace* t, char** jsonl) {
  return guard([&] {
    require(t && jsonl, "trace and jsonl must not be NULL");
    *jsonl = dup(craft::trace_to_jsonl(t->trace));
  });
}

craft_status craft_trace_graph(const craft_trace* t, double collision_speed, char** json) {
  return guard([&] {
    require(t && json, "trace and json must not be NULL");
    const auto events = craft::extract_events(t->trace, t->scene, craft::EventOptions{collision_speed});
    *json = dup(craft::to_json(craft::build_causal_graph(events)).dump(2));
  });
}

craft_status craft_trace_describe(const craft_trace* t, double collision_speed, char** json) {
  return guard([&] {
    require(t && json, "trace and json must not be NULL");
    const auto events = craft::extract_events(t->trace, t->scene, craft::EventOptions{collision_speed});
    *json = dup(craft::to_json(craft::describe(t->scene, events)).dump(2));
  });
}

craft_status craft_trace_render(const craft_trace* t, int fps, int resolution, const char* dir, int* frames) {
  return guard([&] {
    require(t && dir, "trace and dir must not be NULL");
    require(fps > 0 && resolution > 0, "fps and resolution must be positive");
    const auto images = craft::render_frames(t->scene, t->trace, fps, resolution);
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < images.size(); ++i) {
      char file[32];
      std::snprintf(file, sizeof file, "frame_%03zu.png", i);
      craft::write_png(std::filesystem::path(dir) / file, images[i]);
    }
    if (frames) *frames = static_cast<int>(images.size());
  });
}

void craft_trace_destroy(craft_trace* t) { delete t; }

craft_status craft_video_describe(const char* video_dir, char** json) {
  return guard([&] {
    require(video_dir && json, "video_dir and json must not be NULL");
    const auto scene = craft::read_scene(video_dir);
    *json = dup(craft::to_json(craft::describe(scene, craft::read_graph(video_dir).events)).dump(2));
  });
}

craft_status craft_video_answer(const char* video_dir, const char* program, char** answer) {
  return guard([&] {
    require(video_dir && program && answer, "video_dir, program and answer must not be NULL");
    const auto ctx = craft::read_context(video_dir);
    const auto a = craft::dsl::answer(craft::dsl::parse_program(program), ctx);
    *answer = dup(a.value_or("INVALID"));
  });
}

craft_status craft_dataset_stats(const char* dataset_dir, char** json) {
  return guard([&] {
    require(dataset_dir && json, "dataset_dir and json must not be NULL");
    std::vector<craft::QAInstance> all;
    for (auto& [split, qs] : craft::read_dataset(dataset_dir)) all.insert(all.end(), qs.begin(), qs.end());
    *json = dup(craft::dataset_stats(all).dump(2));
  });
}

craft_status craft_dataset_baseline(const char* dataset_dir, const char* kind, const char* eval_split, uint64_t seed,
                                    char** json) {
  return guard([&] {
    require(dataset_dir && kind && eval_split && json, "arguments must not be NULL");
    const auto b = craft::parse_baseline(kind);
    require(b.has_value(), "unknown baseline kind");
    const std::string split = eval_split;
    require(split == "val" || split == "test", "eval split must be val or test");
    auto data = craft::read_dataset(dataset_dir);
    *json = dup(craft::to_json(craft::run_baseline(*b, data["train"], data[split], seed)).dump(2));
  });
}

craft_status craft_program_check(const char* program, int allow_placeholders, char** json) {
  return guard([&] {
    require(program && json, "program and json must not be NULL");
    craft::dsl::TypecheckOptions options;
    options.allow_placeholders = allow_placeholders != 0;
    const auto parsed = craft::dsl::parse_program(program);
    const auto typed = craft::dsl::typecheck(parsed, options);
    nlohmann::json out{{"type", craft::dsl::name(typed.root_type)},
                       {"inline", craft::dsl::to_inline(parsed.root)},
                       {"pretty", craft::dsl::pretty(parsed)},
                       {"modules", craft::dsl::modules_used(parsed)}};
    *json = dup(out.dump(2));
  });
}

}  // extern "C"

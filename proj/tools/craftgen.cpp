// Command-line front end. Talks to the library only through craft/craft.h.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "craft/craft.h"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

const std::map<std::string, int> kStageExit{
    {"generate", 10}, {"validate", 11}, {"balance", 12}, {"split", 13}, {"export", 14}};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = "craft_out";
  std::optional<int> jobs;
  bool render = false;
};

int exit_for(craft_status s) {
  switch (s) {
    case CRAFT_OK: return 0;
    case CRAFT_E_ARGUMENT: return kExitUsage;
    case CRAFT_E_IO: return kExitIo;
    default: return kExitOther;
  }
}

int report(craft_status s) {
  if (s != CRAFT_OK) std::cerr << "error (" << craft_status_name(s) << "): " << craft_last_error() << "\n";
  return exit_for(s);
}

/// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  craft_string_free(s);
  return out;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Config file contents with command-line overrides applied.
std::optional<std::string> build_config(const Globals& g) {
  nlohmann::json cfg = nlohmann::json::object();
  if (!g.config.empty()) {
    const auto text = read_file(g.config);
    if (!text) {
      std::cerr << "error (io): cannot read config " << g.config << "\n";
      return std::nullopt;
    }
    try {
      cfg = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error (parse): config " << g.config << ": " << e.what() << "\n";
      return std::nullopt;
    }
  }
  if (g.seed) cfg["seed"] = *g.seed;
  if (g.jobs) cfg["jobs"] = *g.jobs;
  if (g.render) cfg["render"] = true;
  return cfg.dump();
}

int run_stage(const Globals& g, const std::string& stage) {
  const auto cfg = build_config(g);
  if (!cfg) return kExitIo;
  craft_pipeline* p = nullptr;
  craft_status s = craft_pipeline_create(cfg->c_str(), g.out.c_str(), &p);
  if (s != CRAFT_OK) return report(s) == kExitIo ? kExitIo : kExitUsage;
  s = craft_pipeline_run(p, stage.c_str());
  int code = 0;
  if (s == CRAFT_E_STAGE) {
    craft_status cause = CRAFT_OK;
    const char* failed = craft_pipeline_failed_stage(p, &cause);
    std::cerr << "error (" << craft_status_name(cause) << "): " << craft_last_error() << "\n";
    code = failed ? kStageExit.at(failed) : kExitOther;
  } else if (s != CRAFT_OK) {
    code = report(s);
  } else if (stage == "export" || stage == "all") {
    char* manifest = nullptr;
    if (craft_pipeline_manifest(p, &manifest) == CRAFT_OK) {
      const auto m = nlohmann::json::parse(take(manifest));
      std::cout << "wrote " << g.out << " (" << m.at("files").size() << " files)\n";
      for (const auto& [split, c] : m.at("counts").items()) {
        std::cout << "  " << split << ": " << c.at("questions") << " questions, " << c.at("videos") << " videos\n";
      }
    }
  } else {
    std::cout << stage << " ok\n";
  }
  craft_pipeline_destroy(p);
  return code;
}

int simulate(const Globals& g, int layout, const std::string& scene_path, double duration) {
  craft_scene* scene = nullptr;
  craft_status s;
  if (!scene_path.empty()) {
    const auto text = read_file(scene_path);
    if (!text) {
      std::cerr << "error (io): cannot read " << scene_path << "\n";
      return kExitIo;
    }
    s = craft_scene_from_json(text->c_str(), &scene);
  } else {
    s = craft_scene_sample(nullptr, layout, g.seed.value_or(0), &scene);
  }
  if (s != CRAFT_OK) return report(s);
  craft_trace* trace = nullptr;
  s = craft_simulate(scene, duration, &trace);
  if (s != CRAFT_OK) {
    craft_scene_destroy(scene);
    return report(s);
  }
  std::error_code ec;
  std::filesystem::create_directories(g.out, ec);
  char *scene_json = nullptr, *jsonl = nullptr, *graph = nullptr, *desc = nullptr;
  if ((s = craft_scene_to_json(scene, &scene_json)) == CRAFT_OK && (s = craft_trace_to_jsonl(trace, &jsonl)) == CRAFT_OK &&
      (s = craft_trace_graph(trace, 0.5, &graph)) == CRAFT_OK && (s = craft_trace_describe(trace, 0.5, &desc)) == CRAFT_OK) {
    const std::string dir = g.out + "/";
    bool ok = write_file(dir + "scene.json", take(scene_json) + "\n") && write_file(dir + "trace.jsonl", take(jsonl)) &&
              write_file(dir + "graph.json", take(graph) + "\n");
    const auto d = nlohmann::json::parse(take(desc));
    ok = ok && write_file(dir + "description.json", d.dump(2) + "\n");
    if (!ok) {
      std::cerr << "error (io): cannot write into " << g.out << "\n";
      s = CRAFT_E_IO;
    } else {
      std::cout << d.at("text").get<std::string>() << "\n";
    }
  }
  if (s == CRAFT_OK && g.render) {
    int frames = 0;
    s = craft_trace_render(trace, 5, 256, (g.out + "/frames").c_str(), &frames);
    if (s == CRAFT_OK) std::cout << "rendered " << frames << " frames\n";
  }
  craft_trace_destroy(trace);
  craft_scene_destroy(scene);
  return report(s);
}

int print_result(craft_status s, char* json) {
  if (s != CRAFT_OK) return report(s);
  std::cout << take(json) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesizes causal physical-reasoning question answering datasets."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--config", g.config, "Pipeline configuration JSON file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads; output does not depend on it")->check(CLI::PositiveNumber);
  app.add_flag("--render", g.render, "Write PNG frames");
  app.add_flag_callback("--version", [] {
    std::cout << "craftgen " << craft_version() << " (" << craft_engine_version() << ")\n";
    throw CLI::Success();
  });

  std::string stage_run;
  for (const char* stage : {"generate", "validate", "balance", "split", "export"}) {
    app.add_subcommand(stage, std::string("Run the ") + stage + " stage")->callback([&, stage] { stage_run = stage; });
  }
  app.add_subcommand("run", "Run every stage in order")->callback([&] { stage_run = "all"; });

  int layout = 1;
  std::string scene_path;
  double duration = 10.0;
  auto* sim = app.add_subcommand("simulate", "Sample or load one scene, simulate it and write its files");
  sim->add_option("--layout", layout, "Layout id")->capture_default_str();
  sim->add_option("--scene", scene_path, "Scene JSON to simulate instead of sampling")->check(CLI::ExistingFile);
  sim->add_option("--duration", duration, "Seconds")->capture_default_str();

  std::string dataset_dir, video_dir, kind = "Random", eval_split = "test", program_path;
  auto* stats = app.add_subcommand("stats", "Answer and category statistics of an exported dataset");
  stats->add_option("dataset", dataset_dir, "Dataset directory")->required();
  auto* describe = app.add_subcommand("describe", "Narrate an exported video");
  describe->add_option("video", video_dir, "Video directory")->required();
  auto* baseline = app.add_subcommand("baseline", "Evaluate a heuristic baseline");
  baseline->add_option("dataset", dataset_dir, "Dataset directory")->required();
  baseline->add_option("--kind", kind, "Random, AT-Random, MFA or AT-MFA")->capture_default_str();
  baseline->add_option("--split", eval_split, "val or test")->capture_default_str();
  auto* check = app.add_subcommand("check", "Typecheck a program file and pretty-print it");
  check->add_option("program", program_path, "Program text file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (!stage_run.empty()) return run_stage(g, stage_run);
  if (*sim) return simulate(g, layout, scene_path, duration);
  char* json = nullptr;
  if (*stats) return print_result(craft_dataset_stats(dataset_dir.c_str(), &json), json);
  if (*describe) return print_result(craft_video_describe(video_dir.c_str(), &json), json);
  if (*baseline) {
    return print_result(craft_dataset_baseline(dataset_dir.c_str(), kind.c_str(), eval_split.c_str(),
                                               g.seed.value_or(0), &json),
                        json);
  }
  if (*check) {
    const auto text = read_file(program_path);
    if (!text) return kExitIo;
    return print_result(craft_program_check(text->c_str(), 0, &json), json);
  }
  return kExitUsage;
}

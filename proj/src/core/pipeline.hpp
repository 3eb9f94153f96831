#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "curation.hpp"
#include "dataset.hpp"
#include "dsl/evaluate.hpp"
#include "error.hpp"
#include "events.hpp"

namespace craft {

inline constexpr std::string_view kDatasetVersion = "craft-dataset/1";

struct PipelineConfig {
  int videos = 20;
  int questions_per_video = 10;
  std::uint64_t seed = 0;
  std::vector<int> layouts;  // empty: every catalog layout, round robin
  double duration = 10.0;
  double collision_speed = 0.5;
  int sample_attempts = 5;  // re-seeds per video after sampling or simulation failure
  PerturbationPolicy perturbation;
  BalanceOptions balance;
  SplitConfig split;
  bool render = false;
  int fps = 5;
  int resolution = 256;
  bool export_variation_traces = false;
  bool precompute_variations = false;
  std::string catalog_path;    // empty: bundled
  std::string templates_path;  // empty: bundled
  int jobs = 1;                // never changes output
};

/// Unknown keys are rejected with ErrorKind::validation.
PipelineConfig config_from_json(const nlohmann::json& j);
/// Output-relevant fields only; `jobs` is omitted so manifests do not depend on it.
nlohmann::json to_json(const PipelineConfig& c);

enum class Stage { generate, validate, balance, split, exported };
std::string_view name(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

/// Raised by Pipeline when a stage fails; the stage's partial outputs are removed.
class StageError : public Error {
 public:
  StageError(Stage stage, ErrorKind cause, const std::string& message);
  Stage stage() const { return stage_; }
  ErrorKind cause() const { return cause_; }

 private:
  Stage stage_;
  ErrorKind cause_;
};

/// Runs `fn(i)` for i in [0, n) on `jobs` threads. The exception of the lowest
/// failing index is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Output layout under `out`:
///   videos/<scene_id>/{scene.json, trace.jsonl, graph.json, description.json,
///                      variations/<id>.graph.json, [variations/<id>.trace.jsonl], [frames/*.png]}
///   stages/{generated,validated,balanced,split}.jsonl plus *_report.json
///   dataset/{train,val,test}.jsonl, manifest.json
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path out);

  void generate();
  void validate();
  void balance();
  void split();
  /// Writes the split files and the manifest; returns the manifest.
  nlohmann::json export_dataset();
  nlohmann::json run_all();
  void run(Stage stage);

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& out() const { return out_; }

 private:
  void stage(Stage s, const std::function<void(const std::filesystem::path& staging)>& body);

  PipelineConfig config_;
  std::filesystem::path out_;
};

/// Scene and trace of one exported video directory.
SceneSpec read_scene(const std::filesystem::path& video_dir);
CausalGraph read_graph(const std::filesystem::path& video_dir);

/// Context rebuilt from exported files: states from the trace, events from
/// graph.json, variations from variations/<id>.graph.json.
dsl::SimContext read_context(const std::filesystem::path& video_dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace craft

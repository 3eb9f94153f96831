#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "questions.hpp"

namespace craft {

/// Template narration of the filtered causal graph.
struct OracleDescription {
  std::string scene_id;
  std::vector<std::string> sentences;
  std::string text;  // sentences joined by single spaces
};

/// Keeps Start, End, Collision and EnterBasket events in tick order, dropping
/// any event that involves a static element other than the ground or a basket.
OracleDescription describe(const SceneSpec& scene, const std::vector<Event>& events);
/// "the small red circle", "the ground", "the basket".
std::string object_phrase(const SceneSpec& scene, int object_id);

nlohmann::json to_json(const OracleDescription& d);

/// Reads every "<split>.jsonl" file of a dataset directory.
std::vector<QAInstance> read_instances(const std::filesystem::path& jsonl);
void write_instances(const std::filesystem::path& jsonl, const std::vector<QAInstance>& instances);
std::map<std::string, std::vector<QAInstance>> read_dataset(const std::filesystem::path& dataset_dir);

/// Nested category / answer-type / answer histograms plus per-layout and per-split counts.
nlohmann::json dataset_stats(const std::vector<QAInstance>& instances);

enum class Baseline { random, at_random, mfa, at_mfa };
std::string_view name(Baseline b);
std::optional<Baseline> parse_baseline(std::string_view s);

struct TrainStats {
  std::map<std::string, int> answers;
  std::map<dsl::AnswerType, std::map<std::string, int>> by_type;
  std::size_t size = 0;
};

TrainStats train_stats(const std::vector<QAInstance>& train);

class HeuristicModel {
 public:
  /// Throws ErrorKind::argument for MFA variants with empty train stats.
  HeuristicModel(Baseline kind, TrainStats stats, std::uint64_t seed);
  std::string answer(const QAInstance& q);

 private:
  Baseline kind_;
  TrainStats stats_;
  Rng rng_;
  std::string global_mode_;
  std::map<dsl::AnswerType, std::string> type_mode_;
};

struct BaselineResult {
  Baseline kind = Baseline::random;
  std::size_t evaluated = 0;
  double accuracy = 0.0;
  std::map<std::string, double> per_category;
  std::map<std::string, double> per_subcategory;
};

BaselineResult run_baseline(Baseline kind, const std::vector<QAInstance>& train, const std::vector<QAInstance>& eval,
                            std::uint64_t seed);
nlohmann::json to_json(const BaselineResult& r);

}  // namespace craft

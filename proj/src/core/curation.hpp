#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "questions.hpp"

namespace craft {

struct PerturbationPolicy {
  int trial_count = 10;
  double position_jitter = 0.02;  // meters, per axis
  double angle_jitter = 0.02;     // radians
  double velocity_jitter = 0.02;  // fraction of the initial velocity

  /// Same policy with every jitter multiplied by `factor`.
  PerturbationPolicy scaled(double factor) const;
  /// Throws ErrorKind::validation unless trial_count >= 1 and jitters are finite and >= 0.
  void check() const;
};

/// Jitter ladder: level k uses the policy scaled by 2^-k. Levels continue while
/// some jitter stays at or above its floor. Samples depend only on the level's
/// absolute magnitudes and the trial index, so the ladder of policy/2 is a
/// suffix of the ladder of policy and stability at j implies stability at j/2
/// for any j whose halved ladder is non-empty.
inline constexpr double kPositionFloor = 0.005;
inline constexpr double kAngleFloor = 0.005;
inline constexpr double kVelocityFloor = 0.005;
std::vector<PerturbationPolicy> jitter_ladder(const PerturbationPolicy& policy);

/// Applies trial `trial` of `level` to every dynamic object: uniform offsets in
/// [-j, j], velocity scaled by (1 + u * j_v). An object pushed into geometry is
/// raised until it clears (objects are placed bottom-up).
SceneSpec perturb(const SceneSpec& scene, const PerturbationPolicy& level, int trial);

enum class Stability { stable, unstable };
std::string_view name(Stability s);

struct ValidationReport {
  std::vector<Stability> results;  // parallel to the instances
  int levels = 0;
  int perturbed_scenes = 0;
  int simulations = 0;  // including counterfactual re-simulations
  int blowups = 0;
};

/// Re-evaluates every instance of one video on shared perturbed scenes.
/// A perturbed blow-up marks every pending instance unstable.
ValidationReport validate_video(const SceneSpec& scene, const std::vector<QAInstance>& instances,
                                const PerturbationPolicy& policy, const physics::SimConfig& config = {},
                                const EventOptions& events = {});

Stability validate_instance(const QAInstance& instance, const SceneSpec& scene, const PerturbationPolicy& policy,
                            const physics::SimConfig& config = {}, const EventOptions& events = {});

struct BalanceOptions {
  double cap_factor = 1.25;
  std::uint64_t seed = 0;
  bool global_pass = true;
};

struct GroupReport {
  std::string template_id;
  std::map<std::string, int> before;
  std::map<std::string, int> after;
  bool dropped = false;
};

struct BalanceResult {
  std::vector<QAInstance> selected;  // input order preserved
  std::vector<GroupReport> groups;
  std::vector<std::string> warnings;
};

/// Rejection-based: instances are only discarded, never relabelled.
BalanceResult balance(const std::vector<QAInstance>& instances, const BalanceOptions& options = {});

/// Largest per-answer cap c with c <= factor * sum(min(count, c)) / k.
int balance_cap(const std::vector<int>& counts, double factor);

enum class SplitMode { easy, hard };
std::string_view name(SplitMode m);
std::optional<SplitMode> parse_split_mode(std::string_view s);

struct SplitConfig {
  SplitMode mode = SplitMode::easy;
  double train = 0.6;
  double val = 0.2;
  std::set<int> train_layouts{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::set<int> val_layouts{13, 14, 15, 16};
  std::set<int> test_layouts{17, 18, 19, 20};

  /// Throws ErrorKind::validation on bad ratios or overlapping layout sets.
  void check() const;
};

/// Tags every instance with "train", "val" or "test"; all questions of a video share a split.
std::vector<QAInstance> assign_splits(std::vector<QAInstance> instances, const SplitConfig& config,
                                      std::uint64_t seed);

nlohmann::json to_json(const PerturbationPolicy& p);
PerturbationPolicy policy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SplitConfig& c);
SplitConfig split_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BalanceResult& r);

}  // namespace craft

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynwm/attacks.h"
#include "dynwm/model.h"
#include "dynwm/switching.h"

namespace dynwm {

inline constexpr int kScenarioSchemaVersion = 1;

/// Which statistics may raise an alarm.
enum class MonitoredStatistics { kBoth, kPhi1, kPhi2 };

struct ThresholdSpec {
  double rho1 = -0.98;
  double rho2 = -0.98;
  /// Empty means "use the bound computed from the model and gains".
  std::optional<double> c1_over_n;
  std::optional<double> c2_over_n;
  /// Use one constant (the largest) for both statistics.
  bool single_s = false;
  MonitoredStatistics monitor = MonitoredStatistics::kBoth;
  DecisionRule rule = DecisionRule::kDetection;
};

struct ScenarioConfig {
  int schema_version = kScenarioSchemaVersion;
  /// "lane_keeping" or "custom".
  std::string model_name = "lane_keeping";
  PlantModel model;
  std::optional<ControllerConfig> gains;
  Vector watermark_support;
  AttackSpec attack;
  ThresholdSpec thresholds;
  std::int64_t steps = 1000;
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  int warmup = 4;
  std::optional<int> dwell_override;
  /// When false the decision rule still runs (and is logged) but the plant
  /// always uses sensor 1.
  bool switching_enabled = true;
  /// State coordinate reported as the lateral error.
  int tracked_state = 1;
  /// Per-step logs are kept for trial ids below this value.
  std::int64_t step_log_trials = 0;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
  std::vector<double> rho_grid;

  /// Throws on invalid settings; returns non-fatal warnings.
  std::vector<std::string> validate() const;
};

/// Defaults for the lane-keeping preset: published noise supports, watermark
/// half-width 2, reference gains.
ScenarioConfig default_lane_keeping_scenario();

ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioConfig& config);
/// Throws kIOFailure if the file cannot be read, kInvalidConfig on bad content.
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::string to_string(AttackKind kind);

}  // namespace dynwm

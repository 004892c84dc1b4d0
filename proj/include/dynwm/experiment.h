#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynwm/detector.h"
#include "dynwm/scenario.h"
#include "dynwm/switching.h"

namespace dynwm {

/// A validated scenario with everything that is shared between trials.
struct Experiment {
  ScenarioConfig config;
  ControllerConfig ctl;
  int kprime = 0;
  int tau = 1;
  std::shared_ptr<const DetectorParams> params;
  /// Threshold constants actually used for Phi1 and Phi2.
  double c1_over_n = 0.0;
  double c2_over_n = 0.0;
  std::vector<std::string> warnings;
};

/// Resolves gains, k', the dwell time and the threshold constants.
Experiment prepare(const ScenarioConfig& config);

struct StepRecord {
  std::int64_t trial_id = 0;
  std::int64_t n = 0;
  int alpha = 1;
  double phi1_norm = 0.0;
  double phi2_norm = 0.0;
  double phi3_norm = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double y_lateral = 0.0;
  bool attack_active = false;

  bool operator==(const StepRecord&) const = default;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct TrialResult {
  std::int64_t trial_id = 0;
  std::uint64_t seed = 0;
  /// Step of the first 1 -> 0 switch.
  std::optional<std::int64_t> detected_at;
  /// Step of the first 1 -> 0 switch decided while the attack was active.
  std::optional<std::int64_t> attack_detected_at;
  std::int64_t switch_count = 0;
  /// 1 -> 0 switches decided while no attack was active.
  std::int64_t false_switches = 0;
  /// max_n |y_n - y_n^clean| for the tracked state against the same trial
  /// without the attack. Zero when the scenario has no attack.
  double max_lateral_dev = 0.0;
  std::vector<SwitchEvent> switch_log;
  std::vector<StepRecord> steps;

  bool operator==(const TrialResult&) const = default;
};

/// Knobs for one closed-loop run. Empty optionals take the scenario value.
struct RunOptions {
  std::optional<AttackSpec> attack;
  std::optional<bool> switching;
  bool record_steps = false;
  StepObserver observer;
};

/// One run without the paired clean reference. `lateral` receives the tracked
/// state x_n for every step when non-null.
TrialResult simulate(const Experiment& exp, std::int64_t trial_id,
                     const RunOptions& options,
                     std::vector<double>* lateral = nullptr);

/// simulate() plus the paired no-attack run for max_lateral_dev. Step records
/// are kept when trial_id < step_log_trials.
TrialResult run_trial(const Experiment& exp, std::int64_t trial_id,
                      const StepObserver& observer = {});

/// All trials of the scenario, sorted by trial_id. The result does not depend
/// on the thread count.
std::vector<TrialResult> run_trials(const Experiment& exp);

struct SweepRow {
  double rho = 0.0;
  std::int64_t trials = 0;
  double detection_rate = 0.0;
  /// Over detected trials, in steps after the attack onset. NaN if none.
  double mean_detection_time = 0.0;
  double median_detection_time = 0.0;
  /// Fraction of no-attack trials with at least one switch.
  double false_switch_rate = 0.0;
  double mean_false_switches = 0.0;
};

/// One row per rho (used for both statistics).
std::vector<SweepRow> run_sweep(const ScenarioConfig& config,
                                const std::vector<double>& rho_grid);

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<TrialResult>& results);
void write_steps_csv(const std::filesystem::path& path,
                     const std::vector<TrialResult>& results);
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows);

/// Runs the scenario and writes trials.csv, steps.csv (when step logs were
/// requested) and sweep.csv (when rho_grid is set) into `out_dir`.
/// Throws kIOFailure when the directory or a file cannot be written.
std::vector<TrialResult> run_monte_carlo(const ScenarioConfig& config,
                                         const std::filesystem::path& out_dir);

/// Header and rows of a CSV file written by this library.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double x);

}  // namespace dynwm

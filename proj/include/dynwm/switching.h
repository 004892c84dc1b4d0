#pragma once

#include <cstdint>
#include <vector>

namespace dynwm {

/// kDetection: a threshold violation moves to the protected sensor, and a
/// quiet step after the dwell moves back.
/// kLiteral: the inverted mapping (small statistics select the protected
/// sensor), kept for comparison runs only.
enum class DecisionRule { kDetection, kLiteral };

struct SwitchEvent {
  std::int64_t step;  // first step that runs in the new mode
  int from;
  int to;

  bool operator==(const SwitchEvent&) const = default;
};

struct SwitchState {
  int alpha = 1;
  /// Steps run at alpha = 0 since the last 1 -> 0 switch.
  std::int64_t steps_in_zero = 0;
  int tau = 1;
  int warmup = 4;
  std::int64_t decisions = 0;
  DecisionRule rule = DecisionRule::kDetection;
  std::vector<SwitchEvent> switch_log;
};

/// Alarm predicate: either monitored statistic at or above its threshold.
inline bool is_violation(double phi1_norm, double phi2_norm, double t1,
                         double t2) {
  return phi1_norm >= t1 || phi2_norm >= t2;
}

/// Consumes the statistics of sample N = state.decisions and returns the
/// state holding alpha for the next step. No switch is made during the first
/// `warmup` decisions.
SwitchState decide(SwitchState state, double phi1_norm, double phi2_norm,
                   double t1, double t2);

/// True when every 0 -> 1 event comes at least tau steps after the step at
/// which alpha last became 0 (step 0 if the log starts at alpha = 0).
bool dwell_respected(const std::vector<SwitchEvent>& log, int tau,
                     int initial_alpha = 1);

}  // namespace dynwm

#include "dynwm/switching.h"

namespace dynwm {

SwitchState decide(SwitchState state, double phi1_norm, double phi2_norm,
                   double t1, double t2) {
  const std::int64_t index = state.decisions++;
  const std::int64_t next_step = index + 1;
  if (state.alpha == 0) ++state.steps_in_zero;
  if (index < state.warmup) return state;

  bool to_protected = false;
  bool to_accurate = false;
  const bool dwell_met = state.steps_in_zero >= state.tau;
  if (state.rule == DecisionRule::kDetection) {
    const bool violation = is_violation(phi1_norm, phi2_norm, t1, t2);
    to_protected = state.alpha == 1 && violation;
    to_accurate = state.alpha == 0 && dwell_met && !violation;
  } else {
    to_protected = state.alpha == 1 && (phi1_norm < t1 || phi2_norm < t2);
    to_accurate =
        state.alpha == 0 && dwell_met && phi1_norm >= t1 && phi2_norm >= t2;
  }

  if (to_protected) {
    state.switch_log.push_back({next_step, 1, 0});
    state.alpha = 0;
    state.steps_in_zero = 0;
  } else if (to_accurate) {
    state.switch_log.push_back({next_step, 0, 1});
    state.alpha = 1;
  }
  return state;
}

bool dwell_respected(const std::vector<SwitchEvent>& log, int tau,
                     int initial_alpha) {
  int alpha = initial_alpha;
  std::int64_t zero_since = 0;
  for (const SwitchEvent& ev : log) {
    if (ev.from != alpha || ev.from == ev.to) return false;
    if (ev.to == 0) {
      zero_since = ev.step;
    } else if (ev.step - zero_since < tau) {
      return false;
    }
    alpha = ev.to;
  }
  return true;
}

}  // namespace dynwm

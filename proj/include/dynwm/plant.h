#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "dynwm/attacks.h"
#include "dynwm/model.h"
#include "dynwm/rng.h"

namespace dynwm {

/// Process, sensor and watermark noise for one trial.
struct PlantStreams {
  PlantStreams() = default;
  explicit PlantStreams(std::uint64_t seed)
      : process(seed, Stream::kProcess),
        sensor1(seed, Stream::kSensor1),
        sensor2(seed, Stream::kSensor2),
        watermark(seed, Stream::kWatermark) {}

  NoiseStream process;
  NoiseStream sensor1;
  NoiseStream sensor2;
  NoiseStream watermark;
};

/// Closed-loop state at the start of step n. `alpha` selects the sensor fed
/// to the control observer: 1 = C1 (accurate, attackable), 0 = C2 (protected).
struct SimState {
  std::int64_t n = 0;
  Vector x;
  Vector x_ctl;  // control observer, follows the switched stream
  Vector x_det;  // detector observer, always follows sensor 1
  int alpha = 1;
  int kprime = 0;
  /// The last kprime + 2 watermark vectors, oldest first.
  std::deque<Vector> e_history;
  PlantStreams rng;
};

/// Zero initial conditions, alpha = 1.
SimState make_initial_state(const PlantModel& model, int kprime,
                            std::uint64_t seed);

/// Exogenous signals of one step.
struct StepInputs {
  Vector e;     // watermark, q
  Vector w;     // process noise, p
  Vector zeta;  // sensor-1 noise, m
  Vector eta;   // sensor-2 noise, m
  Vector v;     // attack on sensor 1, m
};

struct StepOutput {
  Vector y_switched;  // what the control observer saw
  Vector y_sensor1;   // C1 x + zeta + v
  Vector residual;    // C1 x_det - y_sensor1
  Vector u;           // K x_ctl + e
  Vector e;
  Vector v;
  Vector zeta;
  int alpha = 1;
};

/// Deterministic transition with all exogenous signals supplied.
/// The detector observer is driven by the applied input u_n, so
/// x_det - x obeys d' = (A + L1 C1) d - w - L1 (zeta + v) in every mode.
StepOutput step_with_inputs(SimState& state, const PlantModel& model,
                            const ControllerConfig& ctl,
                            const StepInputs& inputs);

/// Draws e, w, zeta, eta from the state's streams, asks `attacker` for v_n,
/// then advances with step_with_inputs. The caller sets state.alpha.
StepOutput step(SimState& state, const PlantModel& model,
                const ControllerConfig& ctl, Attacker& attacker);

/// e_{n-k'-1} for the sample n just produced by a step, if it exists.
std::optional<Vector> lagged_watermark(const SimState& state);

/// Smallest k in [0, p) with ||C (A + B K)^k B|| > 1e-12. Throws
/// kNoExcitationPath when none exists.
int compute_kprime(const Eigen::Ref<const Matrix>& A,
                   const Eigen::Ref<const Matrix>& B,
                   const Eigen::Ref<const Matrix>& K,
                   const Eigen::Ref<const Matrix>& C);

/// Closed-loop matrices for a fixed mode.
///   estimate_form acts on (x, x'):      [[A, BK], [-LC, A + BK + LC]]
///   error_form acts on (x, x' - x):     [[A + BK, BK], [0, A + LC]]
struct AugmentedMatrices {
  Matrix estimate_form;
  Matrix error_form;
};

AugmentedMatrices build_augmented_matrices(const PlantModel& model,
                                           const ControllerConfig& ctl,
                                           int alpha);

/// Minimum dwell at alpha = 0: with P solving A1 P A1^T - P = -I, the
/// smallest t >= 1 such that A0^t P (A0^t)^T - P <= -I. Throws
/// kNotSchurStable or kDwellSearchExceeded (cap 1e6).
int dwell_time_tau(const Eigen::Ref<const Matrix>& error_form_alpha1,
                   const Eigen::Ref<const Matrix>& error_form_alpha0);

}  // namespace dynwm

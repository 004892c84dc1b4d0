#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dynwm/model.h"
#include "dynwm/rng.h"

namespace dynwm {

enum class AttackKind { kNone, kPerturbation, kReplay };

/// Additive attack v_n on the sensor-1 stream. Active on [start_step,
/// stop_step); a finite window turns a perturbation into a pulse.
struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  Vector perturbation_halfwidth;  // m
  double replay_gamma = 1.0;
  Vector replay_xi0;              // p
  Vector replay_omega_halfwidth;  // p
  Vector replay_zeta_halfwidth;   // m
  std::int64_t start_step = 0;
  std::optional<std::int64_t> stop_step;

  bool active_at(std::int64_t n) const;
  /// Checks vector sizes and signs against the model for the chosen kind.
  void validate(const PlantModel& model) const;
};

/// Attack noise sources, each on its own stream of the trial seed.
struct AttackStreams {
  AttackStreams() = default;
  explicit AttackStreams(std::uint64_t seed)
      : perturbation(seed, Stream::kAttack),
        replay_process(seed, Stream::kReplayProcess),
        replay_sensor(seed, Stream::kReplaySensor) {}

  NoiseStream perturbation;
  NoiseStream replay_process;
  NoiseStream replay_sensor;
};

struct AttackOutput {
  Vector v;
  std::optional<Vector> next_replay_state;
};

/// One attack sample.
///   none          v = 0
///   perturbation  v ~ U[-h, h] per coordinate
///   replay        v = C xi + zeta' - gamma (C x + z),  xi' = (A + B K) xi + omega
/// `true_output` is C1 x_n and `true_noise` is z_n. Throws kMissingReplayState
/// if a replay is active and no replay state is supplied.
AttackOutput attack_value(const AttackSpec& spec, std::int64_t n,
                          AttackStreams& rng, const PlantModel& model,
                          const ControllerConfig& ctl,
                          const Eigen::Ref<const Vector>& true_output,
                          const Eigen::Ref<const Vector>& true_noise,
                          const std::optional<Vector>& replay_state);

/// Stateful wrapper owning the replay state for one trial.
class Attacker {
 public:
  Attacker(AttackSpec spec, std::uint64_t seed);

  Vector next(std::int64_t n, const PlantModel& model,
              const ControllerConfig& ctl,
              const Eigen::Ref<const Vector>& true_output,
              const Eigen::Ref<const Vector>& true_noise);

  const AttackSpec& spec() const { return spec_; }
  const std::optional<Vector>& replay_state() const { return replay_state_; }

 private:
  AttackSpec spec_;
  AttackStreams rng_;
  std::optional<Vector> replay_state_;
};

/// Tracks V_n = C1 sum_{k<n} Lbar_k v_k - v_n with Lbar_k = -(A + L1 C1)^{n-1-k} L1,
/// via s_{n+1} = (A + L1 C1) s_n - L1 v_n and V_n = C1 s_n - v_n.
class AttackDiagnostics {
 public:
  AttackDiagnostics(const PlantModel& model, const ControllerConfig& ctl);

  /// Consumes v_n and returns V_n.
  const Vector& update(const Eigen::Ref<const Vector>& v);

  const std::vector<Vector>& V_history() const { return history_; }
  const Vector& convolution_state() const { return s_; }
  double running_sum_norm() const { return running_sum_; }
  /// sup_N sum_{k<N} ||V_k||; the running sum is nondecreasing so this is
  /// the current sum.
  double G_estimate() const { return running_sum_; }

 private:
  Matrix F_;
  Matrix C1_;
  Matrix L1_;
  Vector s_;
  std::vector<Vector> history_;
  double running_sum_ = 0.0;
};

}  // namespace dynwm

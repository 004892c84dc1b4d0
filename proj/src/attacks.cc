#include "dynwm/attacks.h"

#include <cmath>
#include <string>
#include <utility>

#include "dynwm/error.h"

namespace dynwm {

namespace {

void require_size(const Vector& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " has " + std::to_string(v.size()) +
                    " entries, expected " + std::to_string(n));
  }
  require_finite(v, name);
}

void require_nonnegative(const Vector& v, const char* name) {
  if ((v.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(name) + " must be nonnegative");
  }
}

}  // namespace

bool AttackSpec::active_at(std::int64_t n) const {
  if (kind == AttackKind::kNone || n < start_step) return false;
  return !stop_step || n < *stop_step;
}

void AttackSpec::validate(const PlantModel& model) const {
  const Eigen::Index p = model.state_dim();
  const Eigen::Index m = model.output_dim();
  if (start_step < 0) {
    throw Error(ErrorCode::kInvalidConfig, "attack start_step must be >= 0");
  }
  if (stop_step && *stop_step < start_step) {
    throw Error(ErrorCode::kInvalidConfig,
                "attack stop_step precedes start_step");
  }
  switch (kind) {
    case AttackKind::kNone:
      break;
    case AttackKind::kPerturbation:
      require_size(perturbation_halfwidth, m, "perturbation_halfwidth");
      require_nonnegative(perturbation_halfwidth, "perturbation_halfwidth");
      break;
    case AttackKind::kReplay:
      require_size(replay_xi0, p, "replay_xi0");
      require_size(replay_omega_halfwidth, p, "replay_omega_halfwidth");
      require_size(replay_zeta_halfwidth, m, "replay_zeta_halfwidth");
      require_nonnegative(replay_omega_halfwidth, "replay_omega_halfwidth");
      require_nonnegative(replay_zeta_halfwidth, "replay_zeta_halfwidth");
      if (!std::isfinite(replay_gamma)) {
        throw Error(ErrorCode::kInvalidConfig, "replay_gamma must be finite");
      }
      break;
  }
}

AttackOutput attack_value(const AttackSpec& spec, std::int64_t n,
                          AttackStreams& rng, const PlantModel& model,
                          const ControllerConfig& ctl,
                          const Eigen::Ref<const Vector>& true_output,
                          const Eigen::Ref<const Vector>& true_noise,
                          const std::optional<Vector>& replay_state) {
  const Eigen::Index m = model.output_dim();
  if (true_output.size() != m || true_noise.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "attack_value: measurement size mismatch");
  }
  AttackOutput out{Vector::Zero(m), replay_state};
  if (!spec.active_at(n)) return out;

  switch (spec.kind) {
    case AttackKind::kNone:
      break;
    case AttackKind::kPerturbation:
      out.v = rng.perturbation.uniform_box(spec.perturbation_halfwidth);
      break;
    case AttackKind::kReplay: {
      if (!replay_state) {
        throw Error(ErrorCode::kMissingReplayState,
                    "replay attack active at step " + std::to_string(n) +
                        " without a replay state");
      }
      const Vector& xi = *replay_state;
      const Vector zeta = rng.replay_sensor.uniform_box(spec.replay_zeta_halfwidth);
      const Vector omega =
          rng.replay_process.uniform_box(spec.replay_omega_halfwidth);
      out.v = model.C1 * xi + zeta -
              spec.replay_gamma * (true_output + true_noise);
      out.next_replay_state = (model.A + model.B * ctl.K) * xi + omega;
      break;
    }
  }
  return out;
}

Attacker::Attacker(AttackSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed) {}

Vector Attacker::next(std::int64_t n, const PlantModel& model,
                      const ControllerConfig& ctl,
                      const Eigen::Ref<const Vector>& true_output,
                      const Eigen::Ref<const Vector>& true_noise) {
  if (spec_.kind == AttackKind::kReplay && n == spec_.start_step) {
    replay_state_ = spec_.replay_xi0;
  }
  AttackOutput out = attack_value(spec_, n, rng_, model, ctl, true_output,
                                  true_noise, replay_state_);
  replay_state_ = std::move(out.next_replay_state);
  return std::move(out.v);
}

AttackDiagnostics::AttackDiagnostics(const PlantModel& model,
                                     const ControllerConfig& ctl)
    : F_(model.A + ctl.L1 * model.C1),
      C1_(model.C1),
      L1_(ctl.L1),
      s_(Vector::Zero(model.state_dim())) {}

const Vector& AttackDiagnostics::update(const Eigen::Ref<const Vector>& v) {
  if (v.size() != C1_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "attack vector has " + std::to_string(v.size()) +
                    " entries, expected " + std::to_string(C1_.rows()));
  }
  history_.push_back(C1_ * s_ - v);
  running_sum_ += history_.back().norm();
  s_ = F_ * s_ - L1_ * v;
  return history_.back();
}

}  // namespace dynwm

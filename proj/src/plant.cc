#include "dynwm/plant.h"

#include <string>
#include <utility>

#include "dynwm/error.h"

namespace dynwm {

namespace {

constexpr double kExcitationThreshold = 1e-12;
constexpr int kMaxDwell = 1'000'000;
constexpr double kDwellPsdTolerance = 1e-9;

void require_size(const Vector& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " has " + std::to_string(v.size()) +
                    " entries, expected " + std::to_string(n));
  }
}

// Luenberger update shared by both observers so that identical inputs give
// bitwise identical estimates.
Vector observer_update(const PlantModel& model, const Matrix& L,
                       const Matrix& C, const Vector& estimate,
                       const Vector& u, const Vector& y) {
  return model.A * estimate + model.B * u + L * (C * estimate - y);
}

}  // namespace

SimState make_initial_state(const PlantModel& model, int kprime,
                            std::uint64_t seed) {
  SimState s;
  s.x = Vector::Zero(model.state_dim());
  s.x_ctl = s.x;
  s.x_det = s.x;
  s.kprime = kprime;
  s.rng = PlantStreams(seed);
  return s;
}

StepOutput step_with_inputs(SimState& state, const PlantModel& model,
                            const ControllerConfig& ctl,
                            const StepInputs& in) {
  const Eigen::Index p = model.state_dim();
  const Eigen::Index q = model.input_dim();
  const Eigen::Index m = model.output_dim();
  require_size(state.x, p, "x");
  require_size(state.x_ctl, p, "x_ctl");
  require_size(state.x_det, p, "x_det");
  require_size(in.e, q, "e");
  require_size(in.w, p, "w");
  require_size(in.zeta, m, "zeta");
  require_size(in.eta, m, "eta");
  require_size(in.v, m, "v");

  StepOutput out;
  out.alpha = state.alpha;
  out.e = in.e;
  out.v = in.v;
  out.zeta = in.zeta;
  out.u = ctl.K * state.x_ctl + in.e;
  out.y_sensor1 = model.C1 * state.x + in.zeta + in.v;
  const bool accurate = state.alpha == 1;
  out.y_switched =
      accurate ? out.y_sensor1 : Vector(model.C2 * state.x + in.eta);
  out.residual = model.C1 * state.x_det - out.y_sensor1;

  const Matrix& L = accurate ? ctl.L1 : ctl.L2;
  const Matrix& C = accurate ? model.C1 : model.C2;
  state.x_ctl =
      observer_update(model, L, C, state.x_ctl, out.u, out.y_switched);
  state.x_det = observer_update(model, ctl.L1, model.C1, state.x_det, out.u,
                                out.y_sensor1);
  state.x = model.A * state.x + model.B * out.u + in.w;

  state.e_history.push_back(in.e);
  while (state.e_history.size() > static_cast<std::size_t>(state.kprime) + 2) {
    state.e_history.pop_front();
  }
  ++state.n;
  return out;
}

StepOutput step(SimState& state, const PlantModel& model,
                const ControllerConfig& ctl, Attacker& attacker) {
  StepInputs in;
  in.e = state.rng.watermark.uniform_box(ctl.e_support);
  in.w = state.rng.process.uniform_box(model.w_support);
  in.zeta = state.rng.sensor1.uniform_box(model.zeta_support);
  in.eta = state.rng.sensor2.uniform_box(model.eta_support);
  in.v = attacker.next(state.n, model, ctl, model.C1 * state.x, in.zeta);
  return step_with_inputs(state, model, ctl, in);
}

std::optional<Vector> lagged_watermark(const SimState& state) {
  if (state.e_history.size() < static_cast<std::size_t>(state.kprime) + 2) {
    return std::nullopt;
  }
  return state.e_history.front();
}

int compute_kprime(const Eigen::Ref<const Matrix>& A,
                   const Eigen::Ref<const Matrix>& B,
                   const Eigen::Ref<const Matrix>& K,
                   const Eigen::Ref<const Matrix>& C) {
  require_square(A, "A");
  const Eigen::Index p = A.rows();
  if (B.rows() != p || K.rows() != B.cols() || K.cols() != p ||
      C.cols() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "compute_kprime: shapes");
  }
  const Matrix closed_loop = A + B * K;
  Matrix path = B;  // (A + BK)^k B
  for (Eigen::Index k = 0; k < p; ++k) {
    if (spectral_norm(C * path) > kExcitationThreshold) {
      return static_cast<int>(k);
    }
    path = closed_loop * path;
  }
  throw Error(ErrorCode::kNoExcitationPath,
              "C (A + B K)^k B vanishes for all k < p; the watermark never "
              "reaches the output");
}

AugmentedMatrices build_augmented_matrices(const PlantModel& model,
                                           const ControllerConfig& ctl,
                                           int alpha) {
  const Eigen::Index p = model.state_dim();
  const Matrix& L = alpha == 1 ? ctl.L1 : ctl.L2;
  const Matrix& C = alpha == 1 ? model.C1 : model.C2;
  if (ctl.K.rows() != model.input_dim() || ctl.K.cols() != p ||
      L.rows() != p || L.cols() != C.rows() || C.cols() != p) {
    throw Error(ErrorCode::kDimensionMismatch,
                "build_augmented_matrices: shapes");
  }
  const Matrix BK = model.B * ctl.K;
  const Matrix LC = L * C;

  AugmentedMatrices out;
  out.estimate_form.resize(2 * p, 2 * p);
  out.estimate_form << model.A, BK, -LC, model.A + BK + LC;
  out.error_form.resize(2 * p, 2 * p);
  out.error_form << model.A + BK, BK, Matrix::Zero(p, p), model.A + LC;
  return out;
}

int dwell_time_tau(const Eigen::Ref<const Matrix>& error_form_alpha1,
                   const Eigen::Ref<const Matrix>& error_form_alpha0) {
  require_square(error_form_alpha0, "A_aug(0)");
  if (error_form_alpha0.rows() != error_form_alpha1.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "dwell_time_tau: shapes");
  }
  if (!is_schur_stable(error_form_alpha0)) {
    throw Error(ErrorCode::kNotSchurStable, "A_aug(0) is not Schur stable");
  }
  const Eigen::Index n = error_form_alpha1.rows();
  const Matrix P =
      solve_discrete_lyapunov(error_form_alpha1, Matrix::Identity(n, n));
  const Matrix P_minus_I = P - Matrix::Identity(n, n);
  Matrix power = error_form_alpha0;
  for (int t = 1; t <= kMaxDwell; ++t) {
    const Matrix gap = power * P * power.transpose() - P_minus_I;
    if (max_eigenvalue_symmetric(0.5 * (gap + gap.transpose())) <=
        kDwellPsdTolerance) {
      return t;
    }
    power = error_form_alpha0 * power;
  }
  throw Error(ErrorCode::kDwellSearchExceeded,
              "no dwell time up to " + std::to_string(kMaxDwell));
}

}  // namespace dynwm

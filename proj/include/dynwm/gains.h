#pragma once

#include <optional>

#include "dynwm/model.h"

namespace dynwm {

/// Stabilizing solution X of X = A^T X A - A^T X B (R + B^T X B)^{-1} B^T X A + Q,
/// computed with the structured doubling algorithm.
Matrix solve_dare(const Eigen::Ref<const Matrix>& A,
                  const Eigen::Ref<const Matrix>& B,
                  const Eigen::Ref<const Matrix>& Q,
                  const Eigen::Ref<const Matrix>& R);

/// Gain K of u = K x minimizing sum x^T Q x + u^T R u, i.e. -(R + B^T X B)^{-1} B^T X A.
Matrix dlqr(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
            const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R);

/// Observer gain L making A + L C Schur stable, from the dual LQR problem
/// on (A^T, C^T) with weights (Q, R).
Matrix dual_observer_gain(const Eigen::Ref<const Matrix>& A,
                          const Eigen::Ref<const Matrix>& C,
                          const Eigen::Ref<const Matrix>& Q,
                          const Eigen::Ref<const Matrix>& R);

/// Throws kStabilizationFailed unless A+BK, A+L1 C1 and A+L2 C2 are all Schur
/// stable, and kDimensionMismatch on shape errors.
void validate_gains(const PlantModel& model, const ControllerConfig& ctl);

/// With `gains` present: validates and returns them. Without: synthesizes K,
/// L1, L2 by discrete LQR with identity weights (observers by duality), uses
/// `e_support` for the watermark, validates and returns.
ControllerConfig design_or_validate_gains(
    const PlantModel& model, const std::optional<ControllerConfig>& gains,
    const Vector& e_support);

}  // namespace dynwm

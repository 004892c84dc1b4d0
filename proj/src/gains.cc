#include "dynwm/gains.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <string>

#include "dynwm/error.h"

namespace dynwm {

namespace {

constexpr int kMaxDoublingIterations = 200;
constexpr double kDoublingTolerance = 1e-14;

void require_shape(const Eigen::Ref<const Matrix>& M, Eigen::Index rows,
                   Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " is " + std::to_string(M.rows()) + "x" +
                    std::to_string(M.cols()) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Matrix solve_dare(const Eigen::Ref<const Matrix>& A,
                  const Eigen::Ref<const Matrix>& B,
                  const Eigen::Ref<const Matrix>& Q,
                  const Eigen::Ref<const Matrix>& R) {
  require_square(A, "A");
  const Eigen::Index n = A.rows();
  const Eigen::Index q = B.cols();
  require_shape(B, n, q, "B");
  require_shape(Q, n, n, "Q");
  require_shape(R, q, q, "R");

  const Matrix I = Matrix::Identity(n, n);
  Matrix Ak = A;
  Matrix Gk = B * R.llt().solve(B.transpose());
  Matrix Hk = Q;
  for (int it = 0; it < kMaxDoublingIterations; ++it) {
    Eigen::PartialPivLU<Matrix> W(I + Gk * Hk);
    const Matrix WinvA = W.solve(Ak);
    const Matrix WinvG = W.solve(Gk);
    Matrix H_next = Hk + Ak.transpose() * Hk * WinvA;
    Matrix G_next = Gk + Ak * WinvG * Ak.transpose();
    Ak = Ak * WinvA;
    H_next = 0.5 * (H_next + H_next.transpose()).eval();
    G_next = 0.5 * (G_next + G_next.transpose()).eval();
    const double change = (H_next - Hk).norm();
    Hk = std::move(H_next);
    Gk = std::move(G_next);
    if (!Hk.allFinite()) break;
    if (change <= kDoublingTolerance * std::max(1.0, Hk.norm())) return Hk;
  }
  throw Error(ErrorCode::kStabilizationFailed,
              "Riccati doubling iteration did not converge");
}

Matrix dlqr(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
            const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R) {
  const Matrix X = solve_dare(A, B, Q, R);
  const Matrix BtX = B.transpose() * X;
  return -(R + BtX * B).ldlt().solve(BtX * A);
}

Matrix dual_observer_gain(const Eigen::Ref<const Matrix>& A,
                          const Eigen::Ref<const Matrix>& C,
                          const Eigen::Ref<const Matrix>& Q,
                          const Eigen::Ref<const Matrix>& R) {
  // A + L C stable  <=>  A^T + C^T L^T stable.
  return dlqr(A.transpose(), C.transpose(), Q, R).transpose();
}

void validate_gains(const PlantModel& model, const ControllerConfig& ctl) {
  const Eigen::Index p = model.state_dim();
  const Eigen::Index q = model.input_dim();
  const Eigen::Index m = model.output_dim();
  require_shape(ctl.K, q, p, "K");
  require_shape(ctl.L1, p, m, "L1");
  require_shape(ctl.L2, p, m, "L2");
  if (ctl.e_support.size() != q) {
    throw Error(ErrorCode::kDimensionMismatch,
                "e_support has " + std::to_string(ctl.e_support.size()) +
                    " entries, expected " + std::to_string(q));
  }
  require_finite(ctl.K, "K");
  require_finite(ctl.L1, "L1");
  require_finite(ctl.L2, "L2");
  require_finite(ctl.e_support, "e_support");
  if ((ctl.e_support.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidConfig, "e_support must be nonnegative");
  }
  if (!is_schur_stable(model.A + model.B * ctl.K)) {
    throw Error(ErrorCode::kStabilizationFailed, "A + B K is not Schur stable");
  }
  if (!is_schur_stable(model.A + ctl.L1 * model.C1)) {
    throw Error(ErrorCode::kStabilizationFailed,
                "A + L1 C1 is not Schur stable");
  }
  if (!is_schur_stable(model.A + ctl.L2 * model.C2)) {
    throw Error(ErrorCode::kStabilizationFailed,
                "A + L2 C2 is not Schur stable");
  }
}

ControllerConfig design_or_validate_gains(
    const PlantModel& model, const std::optional<ControllerConfig>& gains,
    const Vector& e_support) {
  model.validate();
  if (gains) {
    validate_gains(model, *gains);
    return *gains;
  }
  const Eigen::Index p = model.state_dim();
  const Eigen::Index q = model.input_dim();
  const Eigen::Index m = model.output_dim();
  ControllerConfig ctl;
  try {
    ctl.K = dlqr(model.A, model.B, Matrix::Identity(p, p),
                 Matrix::Identity(q, q));
    ctl.L1 = dual_observer_gain(model.A, model.C1, Matrix::Identity(p, p),
                                Matrix::Identity(m, m));
    ctl.L2 = dual_observer_gain(model.A, model.C2, Matrix::Identity(p, p),
                                Matrix::Identity(m, m));
  } catch (const Error& e) {
    throw Error(ErrorCode::kStabilizationFailed,
                std::string("gain synthesis failed: ") + e.what());
  }
  ctl.e_support = e_support;
  validate_gains(model, ctl);
  return ctl;
}

}  // namespace dynwm

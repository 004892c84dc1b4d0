#pragma once

#include "dynwm/linalg.h"

namespace dynwm {

/// Discrete-time plant with one accurate-but-attackable sensor (C1) and one
/// protected sensor (C2). All noise sources are independent uniforms on
/// symmetric boxes given by their per-coordinate half-widths.
struct PlantModel {
  Matrix A;   // p x p
  Matrix B;   // p x q
  Matrix C1;  // m x p
  Matrix C2;  // m x p
  Vector w_support;     // p
  Vector zeta_support;  // m, sensor 1 noise
  Vector eta_support;   // m, sensor 2 noise

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C1.rows(); }

  /// Almost-sure bounds on the process and sensor-1 noise norms.
  double kw() const { return w_support.norm(); }
  double kz() const { return zeta_support.norm(); }

  Matrix sigma_w() const { return uniform_covariance(w_support); }
  Matrix sigma_zeta() const { return uniform_covariance(zeta_support); }
  Matrix sigma_eta() const { return uniform_covariance(eta_support); }

  /// Checks shapes, finiteness, nonnegative supports and Sigma_zeta <= Sigma_eta.
  void validate() const;
};

/// u_n = K x'_n + e_n, with observers x' <- A x' + B u + L (C x' - y).
struct ControllerConfig {
  Matrix K;   // q x p
  Matrix L1;  // p x m
  Matrix L2;  // p x m
  Vector e_support;  // q, watermark half-widths

  double ke() const { return e_support.norm(); }
  Matrix sigma_e() const { return uniform_covariance(e_support); }
};

}  // namespace dynwm

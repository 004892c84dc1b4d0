#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "dynwm/model.h"

namespace dynwm {

/// Constants of the detector that depend only on the model and gains.
/// Built once and shared read-only between trials.
struct DetectorParams {
  Matrix F;           // A + L1 C1, detector error dynamics
  Matrix C1;
  Matrix L1;
  Matrix sigma_w;
  Matrix sigma_zeta;
  Matrix sigma_e;
  Matrix noise_cov;   // Sigma_W + L1 Sigma_zeta L1^T
  double kw = 0.0;
  double kz = 0.0;
  double ke = 0.0;
  int kprime = 0;

  // ||F^k|| <= envelope_gain * envelope_rate^k for all k.
  double envelope_gain = 1.0;
  double envelope_rate = 0.0;
  /// Upper bound on K̄_n over all n.
  double kbar_sup = 0.0;
  /// Per-statistic constants with c_j(N) <= N * s_j for all N.
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double s_cap() const;
};

std::shared_ptr<const DetectorParams> make_detector_params(
    const PlantModel& model, const ControllerConfig& ctl, int kprime);

struct BoundConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double s_cap = 0.0;
  double kbar_sup = 0.0;
};

/// Streaming sums behind the three blocks of the centered watermark test
/// matrix, plus the no-attack expectation and bound recursions.
///
/// For sample n with residual r_n and lagged watermark e_{n-k'-1}:
///   Phi1 = (sum r r^T - sum E[r r^T]) / N
///   Phi2 = sum r e^T / N
///   Phi3 = sum (e e^T - Sigma_E) / N
/// where E[r_n r_n^T] = C1 M_n C1^T + Sigma_zeta and
/// M_{n+1} = F M_n F^T + Sigma_W + L1 Sigma_zeta L1^T, M_0 = 0.
class TestAccumulator {
 public:
  explicit TestAccumulator(std::shared_ptr<const DetectorParams> params);

  /// `lagged` must be present exactly when N >= k' + 1.
  void update(const Eigen::Ref<const Vector>& residual,
              const std::optional<Vector>& lagged);

  std::int64_t count() const { return n_; }

  Matrix phi1() const;
  Matrix phi2() const;
  Matrix phi3() const;

  /// K̄_N: almost-sure bound on the norm of the next residual.
  double kbar() const { return kbar_; }
  /// M_N, covariance of the detector error at the next sample.
  const Matrix& error_covariance() const { return M_; }

  /// 8 sum_{k<N} K̄_k^4.
  double bound_c1() const { return 8.0 * sum_kbar4_; }
  /// sum_{k<N} max{P_k^2, P'_k^2}.
  double bound_c2() const { return sum_pbar2_; }
  double bound_c3() const;
  BoundConstants bounds() const;

  const Matrix& sum_outer() const { return S1_; }
  const Matrix& sum_expected() const { return S1_mean_; }
  const Matrix& sum_cross() const { return S2_; }
  const Matrix& sum_watermark() const { return S3_; }
  const DetectorParams& params() const { return *params_; }

 private:
  std::shared_ptr<const DetectorParams> params_;
  std::int64_t n_ = 0;
  Matrix S1_;
  Matrix S1_mean_;
  Matrix S2_;
  Matrix S3_;
  Matrix M_;
  Matrix powF_;
  double kbar_ = 0.0;
  double sum_kbar4_ = 0.0;
  double sum_pbar2_ = 0.0;
};

/// Closed-form E[(e e^T)^2] - Sigma_E^2 for independent uniform coordinates:
/// diagonal, with entry i = s_i^4/5 + sum_{j != i} s_i^2 s_j^2/9 - s_i^4/9.
Matrix watermark_fourth_moment_excess(const Eigen::Ref<const Vector>& e_support);

/// N * ||(K_e^2 I - Sigma_E)^2 + E[(e e^T)^2] - Sigma_E^2||.
double bound_c3(std::int64_t N, const ControllerConfig& ctl);

/// sqrt((1 + rho) * c_over_n * log(N) / N); +inf for N < 2.
/// Throws kInvalidRho when 1 + rho <= 0.
double threshold(std::int64_t N, double rho, double c_over_n);

/// min(1, dim * exp(-N^2 t^2 / c)).
double hoeffding_tail(double t, std::int64_t N, double c, int dim);

/// Per-step detector log record.
struct DetectorRecord {
  std::int64_t n = 0;
  double phi1_norm = 0.0;
  double phi2_norm = 0.0;
  double phi3_norm = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  int alpha = 1;
};

}  // namespace dynwm

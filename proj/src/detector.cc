#include "dynwm/detector.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynwm/error.h"

namespace dynwm {

namespace {

constexpr int kMaxEnvelopeSteps = 100'000;
// Fitting stops once F^k / rate^k has decayed this far below its running max.
constexpr double kEnvelopeCutoff = 1e-6;

double residual_increment(const DetectorParams& p, const Matrix& powF) {
  return spectral_norm(p.C1 * powF) * p.kw +
         spectral_norm(p.C1 * powF * p.L1) * p.kz;
}

// Fits ||F^k|| <= gain * rate^k with rate halfway between the spectral radius
// and 1, then bounds K̄ by its exact partial sum up to the fit horizon J plus
// a geometric tail.
void fit_residual_envelope(DetectorParams& p) {
  const Eigen::Index n = p.F.rows();
  const double radius = spectral_radius(p.F);
  p.envelope_rate = std::max(0.5 * (1.0 + radius), 0.5);

  Matrix power = Matrix::Identity(n, n);
  Matrix scaled = power;
  double gain = 1.0;
  double partial = p.kz;
  for (int k = 0; k < kMaxEnvelopeSteps; ++k) {
    partial += residual_increment(p, power);
    const double scaled_norm = spectral_norm(scaled);
    gain = std::max(gain, scaled_norm);
    power = p.F * power;
    scaled = (p.F / p.envelope_rate) * scaled;
    if (k >= n && scaled_norm <= kEnvelopeCutoff * gain) break;
  }
  // sum_{i>=0} ||C F^J F^i L|| <= ||C F^J|| ||L|| sum_i ||F^i||.
  const double tail_head =
      spectral_norm(p.C1 * power) * (p.kw + spectral_norm(p.L1) * p.kz);
  p.envelope_gain = gain;
  p.kbar_sup = partial + tail_head * gain / (1.0 - p.envelope_rate);
}

}  // namespace

double DetectorParams::s_cap() const { return std::max({s1, s2, s3}); }

std::shared_ptr<const DetectorParams> make_detector_params(
    const PlantModel& model, const ControllerConfig& ctl, int kprime) {
  auto p = std::make_shared<DetectorParams>();
  p->F = model.A + ctl.L1 * model.C1;
  p->C1 = model.C1;
  p->L1 = ctl.L1;
  p->sigma_w = model.sigma_w();
  p->sigma_zeta = model.sigma_zeta();
  p->sigma_e = ctl.sigma_e();
  p->noise_cov = p->sigma_w + ctl.L1 * p->sigma_zeta * ctl.L1.transpose();
  p->kw = model.kw();
  p->kz = model.kz();
  p->ke = ctl.ke();
  p->kprime = kprime;

  fit_residual_envelope(*p);

  const double ke2 = p->ke * p->ke;
  p->s1 = 8.0 * std::pow(p->kbar_sup, 4);
  // M_n increases to the Lyapunov solution, so its output covariance bounds
  // every finite-n term.
  const Matrix M_inf = solve_discrete_lyapunov(p->F, p->noise_cov);
  const Matrix out_cov_inf =
      p->C1 * M_inf * p->C1.transpose() + p->sigma_zeta;
  p->s2 = std::max(
      (ke2 + p->sigma_e.trace()) * spectral_norm(out_cov_inf),
      p->kbar_sup * p->kbar_sup * (ke2 + spectral_norm(p->sigma_e)));
  p->s3 = bound_c3(1, ctl);
  return p;
}

TestAccumulator::TestAccumulator(std::shared_ptr<const DetectorParams> params)
    : params_(std::move(params)) {
  const Eigen::Index m = params_->C1.rows();
  const Eigen::Index p = params_->F.rows();
  const Eigen::Index q = params_->sigma_e.rows();
  S1_ = Matrix::Zero(m, m);
  S1_mean_ = Matrix::Zero(m, m);
  S2_ = Matrix::Zero(m, q);
  S3_ = Matrix::Zero(q, q);
  M_ = Matrix::Zero(p, p);
  powF_ = Matrix::Identity(p, p);
  kbar_ = params_->kz;
}

void TestAccumulator::update(const Eigen::Ref<const Vector>& r,
                             const std::optional<Vector>& lagged) {
  const DetectorParams& p = *params_;
  if (r.size() != S1_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "residual has " + std::to_string(r.size()) +
                    " entries, expected " + std::to_string(S1_.rows()));
  }
  const bool lag_expected = n_ >= p.kprime + 1;
  if (lagged.has_value() != lag_expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                "lagged watermark must be present iff n >= k' + 1");
  }

  const Matrix expected = p.C1 * M_ * p.C1.transpose() + p.sigma_zeta;
  S1_.noalias() += r * r.transpose();
  S1_mean_ += expected;
  if (lagged) {
    if (lagged->size() != S3_.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "lagged watermark size");
    }
    S2_.noalias() += r * lagged->transpose();
    S3_.noalias() += *lagged * lagged->transpose();
    S3_ -= p.sigma_e;
  }

  const double ke2 = p.ke * p.ke;
  sum_kbar4_ += std::pow(kbar_, 4);
  const double p2 = (ke2 + p.sigma_e.trace()) * spectral_norm(expected);
  const double p2_prime = kbar_ * kbar_ * (ke2 + spectral_norm(p.sigma_e));
  sum_pbar2_ += std::max(p2, p2_prime);

  kbar_ += spectral_norm(p.C1 * powF_) * p.kw +
           spectral_norm(p.C1 * powF_ * p.L1) * p.kz;
  powF_ = p.F * powF_;
  M_ = p.F * M_ * p.F.transpose() + p.noise_cov;
  M_ = 0.5 * (M_ + M_.transpose()).eval();
  ++n_;
}

Matrix TestAccumulator::phi1() const {
  if (n_ == 0) return Matrix::Zero(S1_.rows(), S1_.cols());
  return (S1_ - S1_mean_) / static_cast<double>(n_);
}

Matrix TestAccumulator::phi2() const {
  if (n_ == 0) return Matrix::Zero(S2_.rows(), S2_.cols());
  return S2_ / static_cast<double>(n_);
}

Matrix TestAccumulator::phi3() const {
  if (n_ == 0) return Matrix::Zero(S3_.rows(), S3_.cols());
  return S3_ / static_cast<double>(n_);
}

double TestAccumulator::bound_c3() const {
  return static_cast<double>(n_) * params_->s3;
}

BoundConstants TestAccumulator::bounds() const {
  return BoundConstants{bound_c1(), bound_c2(), bound_c3(), params_->s_cap(),
                        params_->kbar_sup};
}

Matrix watermark_fourth_moment_excess(const Eigen::Ref<const Vector>& s) {
  const Eigen::Index q = s.size();
  Matrix V = Matrix::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const double si2 = s(i) * s(i);
    double moment = si2 * si2 / 5.0;
    for (Eigen::Index j = 0; j < q; ++j) {
      if (j != i) moment += si2 * s(j) * s(j) / 9.0;
    }
    V(i, i) = moment - si2 * si2 / 9.0;
  }
  return V;
}

double bound_c3(std::int64_t N, const ControllerConfig& ctl) {
  const Eigen::Index q = ctl.e_support.size();
  const double ke = ctl.ke();
  const Matrix centered =
      ke * ke * Matrix::Identity(q, q) - ctl.sigma_e();
  const Matrix per_sample =
      centered * centered + watermark_fourth_moment_excess(ctl.e_support);
  return static_cast<double>(N) * spectral_norm(per_sample);
}

double threshold(std::int64_t N, double rho, double c_over_n) {
  if (!(1.0 + rho > 0.0)) {
    throw Error(ErrorCode::kInvalidRho,
                "1 + rho must be positive, got rho = " + std::to_string(rho));
  }
  if (N < 2) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(N);
  return std::sqrt((1.0 + rho) * c_over_n * std::log(n) / n);
}

double hoeffding_tail(double t, std::int64_t N, double c, int dim) {
  const double n = static_cast<double>(N);
  const double tail = dim * std::exp(-n * n * t * t / c);
  return std::clamp(tail, 0.0, 1.0);
}

}  // namespace dynwm

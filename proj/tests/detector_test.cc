#include "dynwm/detector.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dynwm/plant.h"
#include "dynwm/presets.h"
#include "test_oracles.h"
#include "test_util.h"

namespace dynwm {
namespace {

using test::code_of;

double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

GTEST_TEST(AccumulatorTest, AllZero) {
  PlantModel m;
  m.A = Matrix::Identity(2, 2) * 0.5;
  m.B = Matrix::Identity(2, 1);
  m.C1 = Matrix::Identity(1, 2);
  m.C2 = m.C1;
  m.w_support = Vector::Zero(2);
  m.zeta_support = Vector::Zero(1);
  m.eta_support = Vector::Zero(1);
  ControllerConfig ctl{Matrix::Zero(1, 2), Matrix::Zero(2, 1), Matrix::Zero(2, 1),
                       Vector::Zero(1)};
  TestAccumulator acc(make_detector_params(m, ctl, 0));
  for (int n = 0; n < 10; ++n) {
    acc.update(Vector::Zero(1), n >= 1 ? std::optional<Vector>(Vector::Zero(1))
                                       : std::nullopt);
  }
  EXPECT_EQ(acc.phi1(), Matrix::Zero(1, 1));
  EXPECT_EQ(acc.phi2(), Matrix::Zero(1, 1));
  EXPECT_EQ(acc.phi3(), Matrix::Zero(1, 1));
  EXPECT_EQ(acc.bound_c2(), 0.0);
  EXPECT_EQ(acc.bound_c3(), 0.0);
}

GTEST_TEST(AccumulatorTest, EmptyAndFirstSample) {
  const PlantModel m = lane_keeping_preset();
  const ControllerConfig ctl = lane_keeping_reference_gains();
  TestAccumulator acc(make_detector_params(m, ctl, 0));
  EXPECT_EQ(acc.count(), 0);
  EXPECT_EQ(acc.phi1(), Matrix::Zero(3, 3));
  EXPECT_EQ(acc.kbar(), m.kz());
  acc.update(Vector::Zero(3), std::nullopt);
  EXPECT_EQ(acc.sum_expected(), m.sigma_zeta());
}

GTEST_TEST(AccumulatorTest, LagPresenceChecked) {
  const PlantModel m = lane_keeping_preset();
  const ControllerConfig ctl = lane_keeping_reference_gains();
  TestAccumulator acc(make_detector_params(m, ctl, 1));
  EXPECT_EQ(code_of([&] { acc.update(Vector::Zero(3), Vector::Zero(2)); }),
            ErrorCode::kDimensionMismatch);
  acc.update(Vector::Zero(3), std::nullopt);
  acc.update(Vector::Zero(3), std::nullopt);
  EXPECT_EQ(code_of([&] { acc.update(Vector::Zero(3), std::nullopt); }),
            ErrorCode::kDimensionMismatch);
  acc.update(Vector::Zero(3), Vector::Zero(2));
  EXPECT_EQ(code_of([&] { acc.update(Vector::Zero(2), Vector::Zero(2)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { acc.update(Vector::Zero(3), Vector::Zero(3)); }),
            ErrorCode::kDimensionMismatch);
}

GTEST_TEST(AccumulatorTest, StreamingMatchesBatch) {
  test::Gen gen(101);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = test::random_system(gen, gen.integer(2, 4), gen.integer(1, 2),
                                         gen.integer(1, 3));
    const int kprime = compute_kprime(sys.model.A, sys.model.B, sys.ctl.K, sys.model.C1);
    AttackSpec attack;
    if (trial % 2) {
      attack.kind = AttackKind::kPerturbation;
      attack.perturbation_halfwidth = Vector::Constant(sys.model.output_dim(), 0.1);
      attack.start_step = 10;
    }
    const auto log = test::run_logged(sys.model, sys.ctl, kprime, 50, 500 + trial,
                                      attack, 0.2);
    const auto params = make_detector_params(sys.model, sys.ctl, kprime);
    TestAccumulator acc(params);
    std::vector<Matrix> expected;
    for (int n = 0; n < 50; ++n) {
      const Matrix F = params->F;
      const Matrix M = test::expectation_sum(F, sys.ctl.L1, sys.model.sigma_w(),
                                             sys.model.sigma_zeta(), n);
      expected.push_back(sys.model.C1 * M * sys.model.C1.transpose() +
                         sys.model.sigma_zeta());
      acc.update(log.residuals[n], log.lagged[n]);
    }
    const auto batch =
        test::batch_phi(log.residuals, log.lagged, expected, sys.ctl.sigma_e());
    EXPECT_LE(max_abs(acc.phi1() - batch.phi1), 1e-12);
    EXPECT_LE(max_abs(acc.phi2() - batch.phi2), 1e-12);
    EXPECT_LE(max_abs(acc.phi3() - batch.phi3), 1e-12);
    for (const Matrix* S : {&acc.sum_outer(), &acc.sum_expected(), &acc.sum_watermark()}) {
      EXPECT_LE(max_abs(*S - S->transpose()), 1e-10);
    }
  }
}

GTEST_TEST(AccumulatorTest, ExpectationRecursionMatchesSum) {
  test::Gen gen(102);
  for (int trial = 0; trial < 5; ++trial) {
    const auto sys = test::random_system(gen, 3, 1, 2);
    const auto params = make_detector_params(sys.model, sys.ctl, 0);
    TestAccumulator acc(params);
    for (int n = 0; n <= 100; ++n) {
      const Matrix oracle = test::expectation_sum(
          params->F, sys.ctl.L1, sys.model.sigma_w(), sys.model.sigma_zeta(), n);
      ASSERT_LE(max_abs(acc.error_covariance() - oracle), 1e-10) << "n=" << n;
      acc.update(Vector::Zero(2), n >= 1 ? std::optional<Vector>(Vector::Zero(1))
                                         : std::nullopt);
    }
  }
}

GTEST_TEST(KbarTest, Examples) {
  test::Gen gen(103);
  const auto sys = test::random_system(gen, 3, 2, 2);
  const auto params = make_detector_params(sys.model, sys.ctl, 0);
  TestAccumulator acc(params);
  const double kz = sys.model.kz();
  const double kw = sys.model.kw();
  EXPECT_EQ(acc.kbar(), kz);
  acc.update(Vector::Zero(2), std::nullopt);
  EXPECT_NEAR(acc.kbar(),
              kz + test::largest_singular_value(sys.model.C1) * kw +
                  test::largest_singular_value(sys.model.C1 * sys.ctl.L1) * kz,
              1e-14);
  double prev = acc.kbar();
  for (int n = 2; n <= 20; ++n) {
    acc.update(Vector::Zero(2), Vector::Zero(2));
    EXPECT_GE(acc.kbar(), prev);
    prev = acc.kbar();
  }
  EXPECT_NEAR(acc.kbar(),
              test::kbar_sum(params->F, sys.model.C1, sys.ctl.L1, kw, kz, 20), 1e-10);
}

GTEST_TEST(KbarTest, BoundedBySup) {
  test::Gen gen(104);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = test::random_system(gen, gen.integer(2, 5), 1, gen.integer(1, 2));
    const auto params = make_detector_params(sys.model, sys.ctl, 0);
    TestAccumulator acc(params);
    const Vector r = Vector::Zero(sys.model.output_dim());
    for (int n = 0; n < 2000; ++n) {
      ASSERT_LE(acc.kbar(), params->kbar_sup);
      acc.update(r, n >= 1 ? std::optional<Vector>(Vector::Zero(1)) : std::nullopt);
    }
    // Envelope holds on the fitted powers.
    Matrix P = Matrix::Identity(params->F.rows(), params->F.cols());
    for (int k = 0; k < 300; ++k) {
      ASSERT_LE(test::largest_singular_value(P),
                params->envelope_gain * std::pow(params->envelope_rate, k) * (1 + 1e-12));
      P = params->F * P;
    }
  }
}

GTEST_TEST(BoundsTest, C1) {
  test::Gen gen(105);
  const auto sys = test::random_system(gen, 3, 1, 2);
  const auto params = make_detector_params(sys.model, sys.ctl, 0);
  TestAccumulator acc(params);
  acc.update(Vector::Zero(2), std::nullopt);
  EXPECT_NEAR(acc.bound_c1(), 8.0 * std::pow(sys.model.kz(), 4), 1e-15);
  double sum = 8.0 * std::pow(sys.model.kz(), 4);
  for (int n = 1; n < 60; ++n) {
    sum += 8.0 * std::pow(test::kbar_sum(params->F, sys.model.C1, sys.ctl.L1,
                                         sys.model.kw(), sys.model.kz(), n),
                          4);
    acc.update(Vector::Zero(2), Vector::Zero(1));
  }
  EXPECT_NEAR(acc.bound_c1(), sum, 1e-10 * sum);
}

GTEST_TEST(BoundsTest, C1ConstantKbarCollapses) {
  // With no noise entering after k = 0 (K_w = 0, L1 C1 F^k L1 = 0), K̄ stays K_z.
  PlantModel m;
  m.A = Matrix::Zero(1, 1);
  m.B = Matrix::Identity(1, 1);
  m.C1 = Matrix::Identity(1, 1);
  m.C2 = m.C1;
  m.w_support = Vector::Zero(1);
  m.zeta_support = Vector::Constant(1, 0.3);
  m.eta_support = Vector::Constant(1, 0.3);
  ControllerConfig ctl{Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                       Vector::Ones(1)};
  TestAccumulator acc(make_detector_params(m, ctl, 0));
  for (int n = 0; n < 25; ++n) {
    acc.update(Vector::Zero(1), n >= 1 ? std::optional<Vector>(Vector::Zero(1))
                                       : std::nullopt);
  }
  EXPECT_NEAR(acc.bound_c1(), 8.0 * 25 * std::pow(0.3, 4), 1e-14);
}

GTEST_TEST(BoundsTest, C2) {
  test::Gen gen(106);
  auto sys = test::random_system(gen, 3, 2, 2);
  {
    ControllerConfig silent = sys.ctl;
    silent.e_support = Vector::Zero(2);
    TestAccumulator acc(make_detector_params(sys.model, silent, 0));
    for (int n = 0; n < 10; ++n) {
      acc.update(Vector::Zero(2), n >= 1 ? std::optional<Vector>(Vector::Zero(2))
                                         : std::nullopt);
    }
    EXPECT_EQ(acc.bound_c2(), 0.0);
  }
  {
    PlantModel m = sys.model;
    m.w_support = Vector::Zero(3);
    m.zeta_support = Vector::Constant(2, 0.06);
    TestAccumulator acc(make_detector_params(m, sys.ctl, 0));
    acc.update(Vector::Zero(2), std::nullopt);
    const double sigma2 = 0.06 * 0.06 / 3.0;
    const double ke2 = sys.ctl.ke() * sys.ctl.ke();
    const Matrix SE = test::uniform_cov(sys.ctl.e_support);
    const double expected =
        std::max((ke2 + SE.trace()) * sigma2,
                 m.kz() * m.kz() * (ke2 + test::largest_singular_value(SE)));
    EXPECT_NEAR(acc.bound_c2(), expected, 1e-15);
  }
  {
    const auto params = make_detector_params(sys.model, sys.ctl, 0);
    TestAccumulator acc(params);
    const double ke2 = sys.ctl.ke() * sys.ctl.ke();
    const Matrix SE = test::uniform_cov(sys.ctl.e_support);
    double sum = 0.0;
    for (int k = 0; k < 80; ++k) {
      const Matrix M = test::expectation_sum(params->F, sys.ctl.L1, sys.model.sigma_w(),
                                             sys.model.sigma_zeta(), k);
      const double P2 = (ke2 + SE.trace()) *
                        test::largest_singular_value(sys.model.C1 * M * sys.model.C1.transpose() +
                                                     sys.model.sigma_zeta());
      const double kb = test::kbar_sum(params->F, sys.model.C1, sys.ctl.L1,
                                       sys.model.kw(), sys.model.kz(), k);
      const double P2p = kb * kb * (ke2 + test::largest_singular_value(SE));
      sum += std::max(P2, P2p);
      acc.update(Vector::Zero(2), k >= 1 ? std::optional<Vector>(Vector::Zero(2))
                                         : std::nullopt);
    }
    EXPECT_NEAR(acc.bound_c2(), sum, 1e-10 * sum);
  }
}

GTEST_TEST(BoundsTest, C3) {
  ControllerConfig ctl;
  ctl.e_support = Vector::Zero(2);
  EXPECT_EQ(bound_c3(10, ctl), 0.0);
  const double s = 1.7;
  ctl.e_support = Vector::Constant(1, s);
  const double s2 = s * s;
  EXPECT_NEAR(bound_c3(7, ctl),
              7 * ((s2 - s2 / 3) * (s2 - s2 / 3) + 4 * s2 * s2 / 45), 1e-12);

  Vector support(3);
  support << 2.0, 0.5, 1.0;
  EXPECT_LE(max_abs(watermark_fourth_moment_excess(support) -
                    test::watermark_excess(support)),
            1e-14);
}

GTEST_TEST(BoundsTest, FourthMomentMatchesMonteCarlo) {
  Vector support(2);
  support << 2.0, 0.7;
  NoiseStream rng(12, Stream::kWatermark);
  const Matrix SE = test::uniform_cov(support);
  Matrix second = Matrix::Zero(2, 2);
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) {
    const Vector e = rng.uniform_box(support);
    const Matrix E = e * e.transpose();
    second += E * E;
  }
  second /= draws;
  const Matrix empirical = second - SE * SE;
  const Matrix V = watermark_fourth_moment_excess(support);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(empirical(i, i) / V(i, i), 1.0, 0.02);
  }
}

GTEST_TEST(BoundsTest, ConstantsMonotoneAndCapped) {
  test::Gen gen(107);
  std::vector<test::RandomSystem> systems;
  systems.push_back({lane_keeping_preset(), lane_keeping_reference_gains()});
  for (int i = 0; i < 4; ++i) systems.push_back(test::random_system(gen, 3, 1, 2));
  for (const auto& sys : systems) {
    const auto params = make_detector_params(sys.model, sys.ctl, 0);
    TestAccumulator acc(params);
    BoundConstants prev;
    const Vector r = Vector::Zero(sys.model.output_dim());
    const Vector e = Vector::Zero(sys.model.input_dim());
    for (int n = 0; n < 1500; ++n) {
      acc.update(r, n >= 1 ? std::optional<Vector>(e) : std::nullopt);
      const BoundConstants b = acc.bounds();
      const double N = static_cast<double>(acc.count());
      ASSERT_GE(b.c1, prev.c1);
      ASSERT_GE(b.c2, prev.c2);
      ASSERT_GE(b.c3, prev.c3);
      ASSERT_LE(b.c1 / N, params->s1 * (1 + 1e-12));
      ASSERT_LE(b.c2 / N, params->s2 * (1 + 1e-12));
      ASSERT_LE(b.c3 / N, params->s3 * (1 + 1e-12));
      ASSERT_LE(std::max({b.c1, b.c2, b.c3}) / N, b.s_cap * (1 + 1e-12));
      prev = b;
    }
  }
}

GTEST_TEST(ThresholdTest, Examples) {
  EXPECT_NEAR(threshold(10, 0.0, 1.0), std::sqrt(std::log(10.0) / 10.0), 1e-15);
  EXPECT_NEAR(threshold(10, 0.0, 1.0), 0.4799, 5e-5);
  EXPECT_LT(threshold(10, -1.0 + 1e-12, 1.0), 1e-5);
  EXPECT_NEAR(threshold(10000, -0.98, 6.7502e-5), 3.526e-5, 5e-9);
  EXPECT_EQ(threshold(1, 0.5, 1.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(threshold(0, 0.5, 1.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(code_of([] { threshold(10, -1.0, 1.0); }), ErrorCode::kInvalidRho);
  EXPECT_EQ(code_of([] { threshold(10, -3.0, 1.0); }), ErrorCode::kInvalidRho);
}

GTEST_TEST(HoeffdingTest, Examples) {
  EXPECT_EQ(hoeffding_tail(1e6, 10, 1.0, 3), 0.0);
  EXPECT_NEAR(hoeffding_tail(0.1, 10, 1.0, 1), std::exp(-1.0), 1e-15);
  EXPECT_EQ(hoeffding_tail(0.0, 10, 1.0, 4), 1.0);
  EXPECT_NEAR(hoeffding_tail(0.2, 10, 1.0, 2), 2 * std::exp(-4.0), 1e-15);
}

// Under no attack both blocks are centred: E[r r^T] is the recursion value and
// r_n is independent of e_{n-k'-1}.
GTEST_TEST(AccumulatorTest, UnbiasedWithoutAttack) {
  test::Gen gen(108);
  const auto sys = test::random_system(gen, 2, 1, 1);
  const int kprime = compute_kprime(sys.model.A, sys.model.B, sys.ctl.K, sys.model.C1);
  const auto params = make_detector_params(sys.model, sys.ctl, kprime);
  const int trials = 2000;
  const int N = 500;
  double sum1 = 0, sum1sq = 0, sum2 = 0, sum2sq = 0;
  for (int t = 0; t < trials; ++t) {
    SimState state = make_initial_state(sys.model, kprime, 7000 + t);
    Attacker attacker(AttackSpec{}, 7000 + t);
    TestAccumulator acc(params);
    for (int n = 0; n < N; ++n) {
      const StepOutput out = step(state, sys.model, sys.ctl, attacker);
      acc.update(out.residual, lagged_watermark(state));
    }
    const double p1 = acc.phi1()(0, 0);
    const double p2 = acc.phi2()(0, 0);
    sum1 += p1;
    sum1sq += p1 * p1;
    sum2 += p2;
    sum2sq += p2 * p2;
  }
  auto check = [&](double sum, double sumsq) {
    const double mean = sum / trials;
    const double var = sumsq / trials - mean * mean;
    const double se = std::sqrt(var / trials);
    EXPECT_LE(std::abs(mean), 3 * se) << "mean " << mean << " se " << se;
  };
  check(sum1, sum1sq);
  check(sum2, sum2sq);
}

GTEST_TEST(DetectorParamsTest, LaneKeepingSelfConsistent) {
  const PlantModel m = lane_keeping_preset();
  const ControllerConfig ctl = lane_keeping_reference_gains();
  const auto params = make_detector_params(m, ctl, 0);
  TestAccumulator acc(params);
  for (int n = 0; n < 1000; ++n) {
    acc.update(Vector::Zero(3), n >= 1 ? std::optional<Vector>(Vector::Zero(2))
                                       : std::nullopt);
  }
  EXPECT_LE(acc.bound_c1() / 1000.0, params->s_cap());
  EXPECT_GT(params->s1, 0.0);
  EXPECT_GT(params->s2, 0.0);
  EXPECT_GT(params->s3, 0.0);
}

}  // namespace
}  // namespace dynwm

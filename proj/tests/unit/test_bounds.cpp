#include "blind_lmmse/bounds.hpp"
#include "blind_lmmse/convolution.hpp"
#include "blind_lmmse/datagen.hpp"
#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/estimators.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace blmmse {
namespace {

using testing::instance_s;

// Instance S under the source-condition prior Cxx = E[a²]^α, with the scalar
// singular value a ~ (1, 0.25) attached.
ProblemMoments instance_s_source(double alpha, double beta = 0.5) {
  ProblemMoments pm = instance_s();
  pm.op = pm.op.with_singular_moments({{1.0, 0.25}});
  pm.c_xx = source_condition_prior(pm.op, alpha).c_xx;
  pm.beta = beta;
  return pm;
}

TEST(MatrixPower, Cases) {
  Rng rng(1, 1);
  const Matrix m = Matrix::Identity(3, 3) * 2.0 + Matrix::Ones(3, 3);
  EXPECT_LE((matrix_power_psd(m, 0.0) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
  const Matrix d = (Vector(2) << 4.0, 9.0).finished().asDiagonal();
  EXPECT_LE((matrix_power_psd(d, 0.5) - Matrix((Vector(2) << 2.0, 3.0).finished().asDiagonal())).cwiseAbs().maxCoeff(),
            1e-14);
  EXPECT_NEAR(matrix_power_psd(Matrix::Constant(1, 1, 1.25), 2.0)(0, 0), 1.5625, 1e-15);
}

TEST(MatrixPower, ClampsTinyNegativeEigenvalues) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1e-12;
  EXPECT_EQ(matrix_power_psd(m, 0.5)(1, 1), 0.0);
  m(1, 1) = -1e-3;
  EXPECT_THROW(matrix_power_psd(m, 0.5), InvalidMomentsError);
}

TEST(MatrixPower, EigenvaluesArePowered) {
  Rng rng(2, 1);
  Matrix b(4, 4);
  for (Eigen::Index i = 0; i < 16; ++i) b.data()[i] = rng.normal();
  const Matrix base = b * b.transpose() + 0.1 * Matrix::Identity(4, 4);
  const double alpha = 1.3;
  const Matrix p = matrix_power_psd(base, alpha);
  Eigen::SelfAdjointEigenSolver<Matrix> eb(base);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Vector v = eb.eigenvectors().col(i);
    const double expected = std::pow(eb.eigenvalues()(i), alpha);
    // Shared eigenvectors: p v = λ^α v.
    EXPECT_LE((p * v - expected * v).norm(), 1e-8 * expected);
  }
}

TEST(SourceCondition, DeterministicIdentity) {
  const auto op = OperatorEnsemble::deterministic(Matrix::Identity(3, 3));
  for (double alpha : {0.5, 1.0, 2.0}) {
    EXPECT_LE((source_condition_prior(op, alpha).c_xx - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(SourceCondition, InstanceS) {
  const SourceConditionPrior p = source_condition_prior(instance_s().op, 1.0);
  EXPECT_DOUBLE_EQ(p.base(0, 0), 1.25);
  EXPECT_DOUBLE_EQ(p.c_xx(0, 0), 1.25);
  EXPECT_THROW(source_condition_prior(instance_s().op, 0.0), std::invalid_argument);
}

TEST(SourceCondition, EmpiricalBaseMatchesClosedForm) {
  const ShiftedKernelEnsemble ens{8, 5, 0.5, 0.4, 0.0};
  const auto op = operator_cov_from_kernel(kernel_stats(ens));
  const OperatorSampler sampler = [&](Rng& r) { return conv_matrix_from_kernel(sample_kernel(ens, r)); };
  const std::size_t draws = 10000;
  const SourceConditionPrior emp = source_condition_prior(sampler, 1.0, draws, 5);
  EXPECT_FALSE(emp.exact);
  const Matrix exact = op.expected_gram();
  // Per-entry standard error from an independent batch of draws.
  Matrix s1 = Matrix::Zero(8, 8);
  Matrix s2 = Matrix::Zero(8, 8);
  Rng rng(77, 1);
  for (std::size_t j = 0; j < draws; ++j) {
    const Matrix a = sampler(rng);
    const Matrix g = a.transpose() * a;
    s1 += g;
    s2 += g.cwiseProduct(g);
  }
  const double nd = static_cast<double>(draws);
  const Matrix se = ((s2 / nd - (s1 / nd).cwiseProduct(s1 / nd)) / nd).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < 8; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      EXPECT_LE(std::abs(emp.base(i, j) - exact(i, j)), 3.0 * se(i, j) + 1e-12) << i << "," << j;
    }
  }
}

TEST(Constants, ClosedForms) {
  EXPECT_NEAR(constant_c1(1.0), std::pow(1.5, 0.75) / 2.0, 1e-15);
  EXPECT_NEAR(constant_c1(1.0), 0.677702, 5e-7);
  EXPECT_NEAR(constant_c2(1.0), std::sqrt(1.0 / 3.0) * 0.5625, 1e-15);
  for (double alpha : {0.5, 1.0, 2.0, 5.0}) {
    EXPECT_GT(constant_c1(alpha), 0.0);
    EXPECT_LT(constant_c1(alpha), 1.0);
  }
}

TEST(SpectrumStats, DeterministicAndScalar) {
  ProblemMoments det{Vector::Zero(2), Matrix::Identity(2, 2),
                     OperatorEnsemble::deterministic(Matrix::Identity(2, 2)).with_singular_moments({{1, 0}, {1, 0}}),
                     0.1};
  for (double c : spectrum_stats(det).cv2) EXPECT_EQ(c, 0.0);

  ProblemMoments s = instance_s();
  s.op = s.op.with_singular_moments({{1.0, 0.25}});
  const SpectrumStats st = spectrum_stats(s);
  EXPECT_DOUBLE_EQ(st.gamma, 1.75);
  EXPECT_DOUBLE_EQ(st.cv2[0], 0.25);
  EXPECT_DOUBLE_EQ(st.spread_ratio[0], 0.2);
  EXPECT_DOUBLE_EQ(st.second_moment[0], 1.25);
}

TEST(ApproxBound, InstanceS) {
  const BoundReport r = approx_bound_rhs(instance_s_source(1.0), 1.0, 0.0);
  EXPECT_NEAR(r.term_noise, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(r.term_operator, 0.25, 1e-15);
  EXPECT_NEAR(r.total, r.term_noise + r.term_operator, 1e-15);
}

TEST(ApproxBound, FixedOperatorHasNoOperatorTerm) {
  const std::vector<SingularMoment> fixed{{1.0, 0.0}, {0.5, 0.0}};
  EXPECT_EQ(approx_bound_rhs(fixed, 2, 0.3, 1.0, 0.0).term_operator, 0.0);
}

TEST(ApproxBound, OperatorTermGrowsGeometricallyInAlpha) {
  const std::vector<SingularMoment> wide{{1.5, 0.5}};  // E[ς²] = 2.75
  double previous = 0.0;
  for (double alpha : {1.0, 2.0, 3.0}) {
    const double t = approx_bound_rhs(wide, 1, 0.1, alpha, 0.0).term_operator;
    EXPECT_GT(t, previous);
    if (previous > 0.0) EXPECT_NEAR(t / previous, 2.75, 1e-12);
    previous = t;
  }
}

TEST(ApproxBound, ConstantModes) {
  const std::vector<SingularMoment> fixed{{1.0, 0.0}};
  const double alpha = 1.0;
  const double beta = 0.25;
  const double scale = std::pow(beta, alpha / (alpha + 1.0));
  const double c1 = constant_c1(alpha);
  const double c2 = constant_c2(alpha);
  EXPECT_NEAR(approx_bound_rhs(fixed, 1, beta, alpha, 0.0, ApproxConstants::proof_printed).total, (c1 + c2) * scale,
              1e-15);
  EXPECT_NEAR(approx_bound_rhs(fixed, 1, beta, alpha, 0.0, ApproxConstants::proof_squared).total,
              (c1 * c1 + c2) * scale, 1e-15);
}

TEST(NormBound, ScalarValues) {
  EXPECT_NEAR(lmmse_norm_bound(1.0, 0.25, 0.25), constant_c1(1.0) * std::pow(0.5, -0.25), 1e-15);
  EXPECT_NEAR(lmmse_norm_bound(1.0, 0.25, 0.25), 0.8059, 5e-5);
  EXPECT_THROW(lmmse_norm_bound(1.0, 0.0, 0.0), PreconditionError);
}

TEST(NormBound, HoldsOnInstanceS) {
  const ProblemMoments pm = instance_s_source(1.0);
  const double actual = spectral_norm(lmmse_blind_signal(pm, 0.0).gain);
  EXPECT_NEAR(actual, 1.25 / 2.0625, 1e-15);
  EXPECT_LE(actual, lmmse_norm_bound(1.0, 0.5, 0.0));
}

TEST(NonblindBound, Values) {
  EXPECT_EQ(nonblind_bound_rhs(1.0, 0.0, 3), 0.0);
  const double expected = (constant_c1(1.0) + constant_c2(1.0)) * 0.5;
  EXPECT_NEAR(nonblind_bound_rhs(1.0, 0.25, 1), expected, 1e-15);
  EXPECT_NEAR(nonblind_bound_rhs(1.0, 0.25, 1), 0.501231, 1e-6);
  const std::vector<SingularMoment> fixed{{2.0, 0.0}, {1.0, 0.0}};
  EXPECT_NEAR(approx_bound_rhs(fixed, 2, 0.4, 1.5, 0.0, ApproxConstants::proof_printed).total,
              nonblind_bound_rhs(1.5, 0.4, 2), 1e-14);
}

TEST(SampleComplexity, InstanceS) {
  const SamplingContext ctx = sampling_context(instance_s());
  EXPECT_DOUBLE_EQ(ctx.gamma, 1.75);
  EXPECT_NEAR(sample_complexity_k(ctx, 1.0, 1.0), std::log(2.0) * 4.0 * 1.75 / 3.0, 1e-14);
  EXPECT_NEAR(sample_complexity_k(ctx, 1.0, 1.0), 1.61734, 5e-6);
  EXPECT_NEAR(sample_complexity_k(ctx, 2.0, 0.5), 2.0 * sample_complexity_k(ctx, 1.0, 1.0), 1e-14);
}

TEST(SamplingThreshold, InstanceS) {
  const SamplingContext ctx = sampling_context(instance_s());
  const double raw = std::log(20.0) * 2.0 * 1.75 * 4.0 / (3.0 * 0.25);
  EXPECT_EQ(sampling_threshold(ctx, 1.0, 1.0, 0.5, 0.1), static_cast<std::uint64_t>(std::floor(raw)) + 1);
  EXPECT_EQ(sampling_threshold(ctx, 1.0, 1.0, 0.5, 0.1), 56u);
}

TEST(SamplingThreshold, Monotone) {
  const SamplingContext ctx = sampling_context(instance_s());
  EXPECT_LT(sampling_threshold(ctx, 1.0, 1.0, 1.0, 0.1), sampling_threshold(ctx, 1.0, 1.0, 0.5, 0.1));
  EXPECT_GT(sampling_threshold(ctx, 1.0, 1.0, 0.5, 0.05), sampling_threshold(ctx, 1.0, 1.0, 0.5, 0.1));
}

TEST(SamplingThreshold, Preconditions) {
  const SamplingContext ctx = sampling_context(instance_s());
  EXPECT_THROW(sampling_threshold(ctx, 1.0, 1.0, 1.75, 0.1), PreconditionError);  // ξ ≥ γ + λ
  EXPECT_NO_THROW(sampling_threshold(ctx, 1.0, 1.0, 1.75, 0.1, 0.5));
  EXPECT_THROW(sampling_threshold(ctx, 1.0, 1.0, 0.5, 0.0), PreconditionError);
  SamplingContext weak = ctx;
  weak.cyy_norm = 0.5 * weak.cxx_norm;
  EXPECT_THROW(sampling_threshold(weak, 1.0, 1.0, 0.5, 0.1), PreconditionError);
}

TEST(SamplingBound, RateModeValueAndScaling) {
  const SamplingContext ctx = sampling_context(instance_s());
  const double k = std::log(2.0) * 4.0 * 1.75 / 3.0;
  const double g = 1.75;
  const double expected = 9.0 * 1.0 * k / (g * 100.0) * (1.0 + 16.0 / (g * g) + 8.0 / g);
  const BoundReport r = sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, 100, RateMode{});
  EXPECT_NEAR(r.total, expected, 1e-13);
  EXPECT_NEAR(r.term_sampling, r.total, 0.0);
  EXPECT_NEAR(sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, 200, RateMode{}).total, 0.5 * r.total, 1e-14);
}

TEST(SamplingBound, RateModePreconditionsNameTheInequality) {
  const SamplingContext ctx = sampling_context(instance_s());
  try {
    sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, 1, RateMode{});
    FAIL() << "N = 1 accepted";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("N > K"), std::string::npos) << e.what();
  }
  try {
    sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, 5, RateMode{});  // 5 > K but 5 < 16K/γ²
    FAIL() << "N = 5 accepted";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("16K/(gamma+lambda)^2"), std::string::npos) << e.what();
  }
}

TEST(SamplingBound, ThresholdModeClosedFormAndSmallXiLimit) {
  const SamplingContext ctx = sampling_context(instance_s());
  const std::uint64_t n = 10000000000ULL;
  // Independent evaluation of the closed form at ξ = 0.4.
  const double g = ctx.gamma;
  const double xi = 0.4;
  const double oracle = static_cast<double>(ctx.m) * ctx.cxy_norm * ctx.cxy_norm * xi * xi / g *
                        (1.0 + std::pow((1.0 + xi) / (g - xi), 2) + 2.0 * (1.0 + xi) / (g - xi));
  EXPECT_NEAR(sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, n, ThresholdMode{xi, 0.1}).total, oracle, 1e-12 * oracle);
  // The bracket depends on ξ too, so the ξ² law only holds as ξ → 0.
  const std::uint64_t big = 1000000000000000ULL;
  const double a = sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, big, ThresholdMode{4e-3, 0.1}).total;
  const double b = sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, big, ThresholdMode{2e-3, 0.1}).total;
  EXPECT_NEAR(a / b, 4.0, 1e-2);
  EXPECT_THROW(sampling_bound_rhs(ctx, 1.0, 1.0, 0.0, 10, ThresholdMode{0.4, 0.1}), PreconditionError);
}

TEST(MainBound, InstanceSComposition) {
  const ProblemMoments pm = instance_s_source(1.0);
  const std::uint64_t n = 10000;
  const BoundReport r = main_bound_rhs(pm, 1.0, 0.0, 1.0, 1.0, n);
  // Cxx = 1.25, Cxy = 1.25, Cyy = γ = 1.25 + 0.3125 + 0.5.
  const double g = 2.0625;
  const double k = std::log(2.0) * 4.0 * g / (3.0 * 1.25 * 1.25);
  const double sampling = 9.0 * 1.25 * 1.25 * k / (g * n) * (1.0 + 1.0 / (g * g) + 1.0 / g);
  EXPECT_NEAR(r.term_noise, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(r.term_operator, 0.25, 1e-15);
  EXPECT_NEAR(r.term_sampling, sampling, 1e-15);
  EXPECT_NEAR(r.total, std::sqrt(0.5) + 0.25 + sampling, 1e-14);
  EXPECT_TRUE(r.precondition_notes.empty()) << r.precondition_notes;
}

TEST(MainBound, NonincreasingInNAndLimit) {
  ProblemMoments pm = instance_s();
  pm.op = OperatorEnsemble::deterministic(Matrix::Identity(1, 1)).with_singular_moments({{1.0, 0.0}});
  double previous = INFINITY;
  for (std::uint64_t n : {100u, 1000u, 10000u, 100000000u}) {
    const double t = main_bound_rhs(pm, 1.0, 0.1, 1.0, 1.0, n).total;
    EXPECT_LE(t, previous);
    previous = t;
  }
  EXPECT_NEAR(previous, std::pow(0.6, 0.5), 1e-6);
}

TEST(MainBound, RecordsUnmetPreconditions) {
  const BoundReport r = main_bound_rhs(instance_s_source(1.0), 1.0, 0.0, 1.0, 1.0, 1);
  EXPECT_FALSE(r.precondition_notes.empty());
}

TEST(DefaultLambda, MeetsRateBoundPreconditions) {
  for (double k : {1.0, 50.0, 2000.0}) {
    for (double gamma : {0.01, 0.5, 3.0}) {
      const std::uint64_t n = 1000;
      const double lambda = default_lambda(k, gamma, n);
      EXPECT_GE(lambda, 1e-6);
      EXPECT_GE(lambda + gamma, 4.0 * std::sqrt(k / n));
      EXPECT_GT(static_cast<double>(n), 16.0 * k / ((gamma + lambda) * (gamma + lambda)));
    }
  }
}

TEST(EstimateRho, InflatedMaximum) {
  Matrix s(2, 3);
  s << 0, 3, 1, 0, 4, 1;
  EXPECT_NEAR(estimate_rho(s, Vector::Zero(2)), 1.1 * 25.0, 1e-14);
}

}  // namespace
}  // namespace blmmse

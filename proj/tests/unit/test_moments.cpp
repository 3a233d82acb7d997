#include "blind_lmmse/convolution.hpp"
#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/instances.hpp"
#include "blind_lmmse/moments.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

namespace blmmse {
namespace {

using testing::instance_s;

TEST(CrossCov, InstanceS) { EXPECT_DOUBLE_EQ(cross_cov_signal_obs(instance_s())(0, 0), 1.0); }

TEST(CrossCov, ZeroOperatorMeanGivesZero) {
  Rng rng(1, 1);
  ProblemMoments pm{Vector::Ones(3), random_spd(3, rng),
                    OperatorEnsemble::from_entry_variances(Matrix::Zero(2, 3), Matrix::Constant(2, 3, 0.1)), 0.2};
  EXPECT_EQ(cross_cov_signal_obs(pm), Matrix::Zero(3, 2));
}

TEST(CrossCov, IdentityPriorGivesTranspose) {
  Matrix theta(2, 3);
  theta << 1, 2, 3, 4, 5, 6;
  ProblemMoments pm{Vector::Zero(3), Matrix::Identity(3, 3), OperatorEnsemble::deterministic(theta), 0.1};
  EXPECT_EQ(cross_cov_signal_obs(pm), theta.transpose());
}

TEST(ObsMean, Cases) {
  EXPECT_DOUBLE_EQ(obs_mean(instance_s())(0), 0.0);
  EXPECT_DOUBLE_EQ(obs_mean(instance_s(2.0))(0), 2.0);
  const Vector tx = (Vector(3) << 1.0, -2.0, 0.5).finished();
  ProblemMoments pm{tx, Matrix::Identity(3, 3), OperatorEnsemble::deterministic(Matrix::Identity(3, 3)), 0.0};
  EXPECT_EQ(obs_mean(pm), tx);
}

TEST(InteractionMatrix, InstanceS) { EXPECT_DOUBLE_EQ(interaction_matrix(instance_s())(0, 0), 0.25); }

TEST(InteractionMatrix, IndependentEntriesTwoByTwo) {
  ProblemMoments pm{Vector::Zero(2), Matrix::Identity(2, 2),
                    OperatorEnsemble::from_entry_variances(Matrix::Identity(2, 2), Matrix::Constant(2, 2, 0.1)),
                    0.1};
  const Matrix expected = 0.2 * Matrix::Identity(2, 2);
  EXPECT_LE((interaction_matrix(pm) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((interaction_matrix_general(pm) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InteractionMatrix, DeterministicOperatorGivesZero) {
  Rng rng(3, 1);
  ProblemMoments pm{Vector::Ones(3), random_spd(3, rng), OperatorEnsemble::deterministic(Matrix::Ones(4, 3)), 0.1};
  EXPECT_EQ(interaction_matrix(pm), Matrix::Zero(4, 4));
}

// Property: every structured fast path agrees with the plain double sum.
TEST(InteractionMatrix, StructuredPathsMatchGeneralSum) {
  const OperatorStructure tags[] = {OperatorStructure::unstructured, OperatorStructure::independent_rows,
                                    OperatorStructure::independent_columns, OperatorStructure::independent_entries};
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng(seed, 77);
    const ProblemMoments pm = random_problem(2 + seed % 5, 1 + seed % 4, tags[seed % 4], rng);
    const Matrix general = interaction_matrix_general(pm);
    EXPECT_LE((interaction_matrix(pm) - general).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + general.cwiseAbs().maxCoeff()))
        << "seed " << seed;
  }
}

TEST(CovObsBlind, InstanceSTerms) {
  const BlindObsCov c = cov_obs_blind(instance_s());
  EXPECT_DOUBLE_EQ(c.mean_term(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.kron_term(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(c.d_term(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(c.noise_term(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(c.total(0, 0), 1.75);
}

TEST(CovObsBlind, InstanceS2) { EXPECT_DOUBLE_EQ(cov_obs_blind(instance_s(2.0)).total(0, 0), 2.75); }

TEST(CovObsBlind, DeterministicReducesToNonBlind) {
  Rng rng(4, 1);
  Matrix a(3, 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  const Matrix cxx = random_spd(4, rng);
  ProblemMoments pm{Vector::Ones(4), cxx, OperatorEnsemble::deterministic(a), 0.3};
  const Matrix expected = a * cxx * a.transpose() + 0.3 * Matrix::Identity(3, 3);
  EXPECT_LE((cov_obs_blind(pm).total - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CovObsBlind, MonteCarloScalarVariance) {
  for (double tx : {0.0, 2.0}) {
    const ProblemMoments pm = instance_s(tx);
    const GaussianModelSampler sampler(pm);
    Rng rng(11, 5);
    const int draws = 1000000;
    double sy = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (int k = 0; k < draws; ++k) {
      const auto d = sampler.draw(rng);
      sy += d.y(0);
      syy += d.y(0) * d.y(0);
      sxy += (d.x(0) - tx) * d.y(0);
    }
    const double mean = sy / draws;
    const double var = syy / draws - mean * mean;
    const double cov_xy = sxy / draws;
    EXPECT_NEAR(var / cov_obs_blind(pm).total(0, 0), 1.0, 0.01) << "theta_x " << tx;
    EXPECT_NEAR(cov_xy, 1.0, 0.01) << "theta_x " << tx;
  }
}

TEST(CovOpObs, ScalarInstances) {
  EXPECT_DOUBLE_EQ(cov_op_obs(instance_s())(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(cov_op_obs(instance_s(2.0))(0, 0), 0.5);
  Rng rng(5, 1);
  ProblemMoments pm{Vector::Ones(3), random_spd(3, rng), OperatorEnsemble::deterministic(Matrix::Ones(2, 3)), 0.1};
  EXPECT_EQ(cov_op_obs(pm), Matrix::Zero(6, 2));
}

TEST(CovObsBlind, RandomInstancesArePsd) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 8);
    const ProblemMoments pm = random_problem(1 + seed % 6, 1 + (seed * 7) % 6, OperatorStructure::unstructured, rng);
    const Matrix cyy = cov_obs_blind(pm).total;
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(cyy).eigenvalues().minCoeff(), pm.beta * (1.0 - 1e-10));
  }
}

TEST(OperatorEnsemble, FullCovarianceRoundTrip) {
  Rng rng(6, 1);
  const Matrix caa = random_spd(6, rng);
  const auto op = OperatorEnsemble::from_full_covariance(Matrix::Zero(2, 3), caa);
  EXPECT_LE((op.assemble_caa() - caa).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(op.row_cov(1, 0), caa.block(3, 0, 3, 3));
}

TEST(OperatorEnsemble, ContractMatchesExplicitSum) {
  Rng rng(9, 1);
  const auto op = OperatorEnsemble::from_full_covariance(Matrix::Zero(3, 2), random_spd(6, rng));
  const Matrix w = random_spd(2, rng);
  const Matrix f = op.contract(w);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(f(i, j), op.row_cov(i, j).cwiseProduct(w).sum(), 1e-14);
  }
}

TEST(OperatorEnsemble, KernelCovarianceAssemblesAsLift) {
  Rng rng(10, 1);
  const Eigen::Index n = 5;
  const Matrix ckk = random_spd(n, rng);
  const auto op = OperatorEnsemble::from_kernel_covariance(Matrix::Zero(n, n), ckk);
  const Matrix p = vec_lift_matrix(n);
  EXPECT_LE((op.assemble_caa() - p * ckk * p.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(OperatorEnsemble, SharedBasisGram) {
  Rng rng(12, 1);
  Matrix g(3, 3);
  for (Eigen::Index i = 0; i < 9; ++i) g.data()[i] = rng.normal();
  const Matrix v = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(3, 3);
  const std::vector<SingularMoment> sm{{2.0, 0.5}, {1.0, 0.1}, {0.5, 0.0}};
  const auto op = OperatorEnsemble::from_shared_basis(Matrix::Identity(3, 3), v, sm);
  Vector e2(3);
  e2 << 4.5, 1.1, 0.25;
  // V_r holds the right singular vectors as rows.
  const Matrix expected = v.transpose() * e2.asDiagonal() * v;
  EXPECT_LE((op.expected_gram() - expected).cwiseAbs().maxCoeff(), 1e-13);
  // Brute force: E[AᵀA] = ΘᵀΘ + Σ_i C_{A_i A_i} from the assembled covariance.
  Matrix brute = op.mean_op().transpose() * op.mean_op();
  for (Eigen::Index i = 0; i < 3; ++i) brute += op.row_cov(i, i);
  EXPECT_LE((brute - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Validation, NamesTheBrokenInvariant) {
  auto expect_invariant = [](const auto& fn, const std::string& name) {
    try {
      fn();
      ADD_FAILURE() << "no error for " << name;
    } catch (const InvalidMomentsError& e) {
      EXPECT_EQ(e.invariant(), name);
    }
  };
  ProblemMoments bad_beta = instance_s();
  bad_beta.beta = -1.0;
  expect_invariant([&] { bad_beta.validate(); }, "beta_nonnegative");

  ProblemMoments bad_cxx{Vector::Zero(2), (Matrix(2, 2) << 1, 0.5, 0, 1).finished(),
                         OperatorEnsemble::deterministic(Matrix::Identity(2, 2)), 0.1};
  expect_invariant([&] { bad_cxx.validate(); }, "c_xx_symmetric");

  std::vector<Matrix> blocks(4, Matrix::Zero(2, 2));
  blocks[0] = Matrix::Identity(2, 2);
  blocks[3] = Matrix::Identity(2, 2);
  blocks[1](0, 1) = 0.1;  // C_{A_0 A_1} without the transposed partner
  expect_invariant(
      [&] { OperatorEnsemble::from_row_covariances(Matrix::Zero(2, 2), blocks).validate(); }, "row_cov_symmetry");

  std::vector<Matrix> coupled(4, 0.1 * Matrix::Identity(2, 2));
  expect_invariant(
      [&] {
        OperatorEnsemble::from_row_covariances(Matrix::Zero(2, 2), coupled, OperatorStructure::independent_rows)
            .validate();
      },
      "structure_independent_rows");

  expect_invariant(
      [&] { OperatorEnsemble::from_entry_variances(Matrix::Zero(1, 2), Matrix::Constant(1, 2, -0.1)).validate(); },
      "entry_variance_nonnegative");

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.01;
  expect_invariant([&] { OperatorEnsemble::from_kernel_covariance(Matrix::Zero(3, 3), asym).validate(); },
                   "row_cov_symmetry");
}

TEST(Validation, DimensionMismatch) {
  ProblemMoments pm{Vector::Zero(3), Matrix::Identity(3, 3), OperatorEnsemble::deterministic(Matrix::Zero(2, 2)), 0.1};
  EXPECT_THROW(pm.check_dimensions(), DimensionError);
  EXPECT_THROW(cov_obs_blind(pm), DimensionError);
}

TEST(SingularMoment, CoefficientOfVariationIdentity) {
  const SingularMoment s{1.0, 0.25};
  EXPECT_DOUBLE_EQ(s.second_moment(), 1.25);
  EXPECT_DOUBLE_EQ(s.cv2(), 0.25);
  EXPECT_DOUBLE_EQ(s.variance / s.second_moment(), s.cv2() / (1.0 + s.cv2()));
  EXPECT_DOUBLE_EQ(SingularMoment::from_raw(2.0, 5.0).variance, 1.0);
}

}  // namespace
}  // namespace blmmse

#include "blind_lmmse/csv.hpp"
#include "blind_lmmse/datagen.hpp"
#include "blind_lmmse/moments.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace blmmse {
namespace {

TEST(Sinusoid, Values) {
  const Vector v = sinusoid_mean(8, 2.0);
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(v(i), 2.0 * std::sin(2.0 * std::numbers::pi * (i + 1) / 8.0), 1e-15);
}

TEST(KernelOffsets, CentredOnZero) {
  EXPECT_EQ(kernel_offsets(5), (std::vector<Eigen::Index>{-2, -1, 0, 1, 2}));
  EXPECT_EQ(kernel_offsets(1), (std::vector<Eigen::Index>{0}));
}

TEST(Kernel, NormalizedAndNonnegativeUnderEveryDraw) {
  for (double spread_std : {0.0, 0.2}) {
    const ShiftedKernelEnsemble ens{32, 21, 0.5, 1.2, spread_std};
    for (std::uint64_t j = 0; j < 200; ++j) {
      const Vector k = sample_kernel(ens, derive_seed(3, j));
      EXPECT_NEAR(k.sum(), 1.0, 1e-14);
      EXPECT_GE(k.minCoeff(), 0.0);
    }
  }
}

TEST(Kernel, ProfileIsCentredAtIndexZero) {
  const ShiftedKernelEnsemble ens{16, 5, 0.7, 0.0, 0.0};
  const Vector k = kernel_profile(ens, 0.0, 0.7);
  EXPECT_EQ(k.maxCoeff(), k(0));
  EXPECT_DOUBLE_EQ(k(1), k(15));  // symmetric around 0 on the circle
  EXPECT_EQ(k(3), 0.0);           // outside the 5-tap support
}

TEST(Kernel, InvalidEnsembleRejected) {
  EXPECT_THROW((ShiftedKernelEnsemble{8, 9, 0.5, 0.4, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((ShiftedKernelEnsemble{8, 3, 0.0, 0.4, 0.0}.validate()), std::invalid_argument);
}

TEST(GaussHermite, LowOrderMoments) {
  const auto [x, w] = gauss_hermite(20);
  EXPECT_NEAR(w.sum(), 1.0, 1e-13);
  EXPECT_NEAR(w.dot(x), 0.0, 1e-13);
  EXPECT_NEAR(w.dot(x.cwiseAbs2()), 1.0, 1e-12);
  EXPECT_NEAR(w.dot(x.array().pow(4).matrix()), 3.0, 1e-11);
}

TEST(KernelStats, MatchMonteCarlo) {
  for (double spread_std : {0.0, 0.15}) {
    const ShiftedKernelEnsemble ens{16, 5, 0.5, 0.6, spread_std};
    const KernelStats ks = kernel_stats(ens);
    ks.validate();
    const int draws = 100000;
    Vector s1 = Vector::Zero(16);
    Matrix s2 = Matrix::Zero(16, 16);
    Matrix s4 = Matrix::Zero(16, 16);
    for (int j = 0; j < draws; ++j) {
      const Vector k = sample_kernel(ens, derive_seed(11, j)) - ks.theta_k;
      s1 += k;
      const Matrix p = k * k.transpose();
      s2 += p;
      s4 += p.cwiseProduct(p);
    }
    const Vector mean_dev = s1 / draws;
    const Matrix cov = s2 / draws;
    const Matrix se = ((s4 / draws - cov.cwiseProduct(cov)) / draws).cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < 16; ++i) {
      EXPECT_LE(std::abs(mean_dev(i)), 3.0 * std::sqrt(ks.c_kk(i, i) / draws) + 1e-15) << i;
      for (Eigen::Index j = 0; j < 16; ++j) {
        EXPECT_LE(std::abs(cov(i, j) - ks.c_kk(i, j)), 3.0 * se(i, j) + 1e-12) << i << "," << j;
      }
    }
  }
}

TEST(Signals, ZeroCovarianceReturnsMean) {
  const GaussianPrior p{sinusoid_mean(6, 1.0), Matrix::Zero(6, 6)};
  const Matrix xs = sample_signals(p, 5, 1);
  for (Eigen::Index j = 0; j < 5; ++j) EXPECT_EQ(xs.col(j), p.mean);
}

TEST(Signals, MeanWithinThreeStandardErrors) {
  const GaussianPrior p = to_gaussian(SinusoidPrior{8, 2.0});
  const Eigen::Index n = 100000;
  const Vector mean = sample_signals(p, n, 5).rowwise().mean();
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_LE(std::abs(mean(i) - p.mean(i)), 3.0 * std::sqrt(2.0 / n));
}

TEST(Samples, NoiselessUnitKernelReproducesSignal) {
  const GaussianPrior p = to_gaussian(SinusoidPrior{12, 2.0});
  const ShiftedKernelEnsemble delta{12, 3, 1e-3, 0.0, 0.0};
  const SampleSet s = generate_samples(p, delta, 0.0, 10, 4);
  EXPECT_EQ(s.ys, s.xs);
}

TEST(Samples, DeterministicAndPrefixStable) {
  const GaussianPrior p = to_gaussian(SinusoidPrior{10, 2.0});
  const ShiftedKernelEnsemble ens{10, 5, 0.5, 0.4, 0.1};
  const SampleSet a = generate_samples(p, ens, 0.5, 20, 9);
  const SampleSet b = generate_samples(p, ens, 0.5, 20, 9);
  const SampleSet longer = generate_samples(p, ens, 0.5, 35, 9);
  EXPECT_EQ(a.xs, b.xs);
  EXPECT_EQ(a.ys, b.ys);
  EXPECT_EQ(longer.ys.leftCols(20), a.ys);
  EXPECT_NE(generate_samples(p, ens, 0.5, 20, 10).ys, a.ys);
}

TEST(Samples, ObservationCovarianceMatchesInducedMoments) {
  const GaussianPrior p = to_gaussian(SinusoidPrior{4, 2.0});
  const ShiftedKernelEnsemble ens{4, 3, 0.6, 0.5, 0.0};
  const double sigma_n = 0.5;
  const ProblemMoments pm = induced_moments(p, ens, sigma_n);
  const Matrix cyy = cov_obs_blind(pm).total;
  const Vector ty = obs_mean(pm);
  const Eigen::Index n = 100000;
  const SampleSet s = generate_samples(p, ens, sigma_n, n, 21);
  const Matrix c = s.ys.colwise() - ty;
  Matrix s2 = Matrix::Zero(4, 4);
  Matrix s4 = Matrix::Zero(4, 4);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Matrix q = c.col(j) * c.col(j).transpose();
    s2 += q;
    s4 += q.cwiseProduct(q);
  }
  const Matrix est = s2 / n;
  const Matrix se = ((s4 / n - est.cwiseProduct(est)) / n).cwiseSqrt();
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_LE(std::abs(c.row(i).mean()), 3.0 * std::sqrt(cyy(i, i) / n)) << i;
    for (Eigen::Index j = 0; j < 4; ++j) EXPECT_LE(std::abs(est(i, j) - cyy(i, j)), 3.0 * se(i, j)) << i << "," << j;
  }
}

TEST(Manifest, RoundTripAndRegeneration) {
  DatasetManifest m;
  m.seed = 123456789012345ULL;
  m.n = 16;
  m.n_train = 30;
  m.d = 5;
  m.spread_std = 0.05;
  m.alpha = 1.3;
  const DatasetManifest back = DatasetManifest::parse(m.to_string());
  EXPECT_EQ(back.to_string(), m.to_string());
  ASSERT_TRUE(back.alpha.has_value());
  EXPECT_EQ(*back.alpha, 1.3);

  const auto dir = testing::scratch_dir("manifest_round_trip");
  const Dataset data = generate_dataset(m);
  write_dataset(data, dir);
  const Dataset again = generate_dataset(DatasetManifest::load(dir / "manifest.txt"));
  EXPECT_EQ(again.samples.xs, data.samples.xs);
  EXPECT_EQ(again.samples.ys, data.samples.ys);
  EXPECT_EQ(read_samples_csv(dir / "y.csv"), data.samples.ys);
}

TEST(Manifest, RejectsForeignGeneratorAndUnknownKeys) {
  EXPECT_THROW(DatasetManifest::parse("generator_version = other/2\n"), std::invalid_argument);
  EXPECT_THROW(DatasetManifest::parse("n = 8\nwidth = 3\n"), std::invalid_argument);
}

}  // namespace
}  // namespace blmmse

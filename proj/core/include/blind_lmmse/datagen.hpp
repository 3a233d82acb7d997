#pragma once

// Synthetic data for periodic 1D deconvolution: sinusoidal signal priors,
// randomly shifted (and optionally rescaled) Gaussian blur kernels, AWGN.

#include "blind_lmmse/convolution.hpp"
#include "blind_lmmse/estimators.hpp"
#include "blind_lmmse/linalg.hpp"
#include "blind_lmmse/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace blmmse {

inline constexpr const char* kGeneratorVersion = "blind-lmmse-datagen/1";

/// θx_i = amplitude · sin(2π(i+1)/n) for 0-based i.
Vector sinusoid_mean(Eigen::Index n, double amplitude);

/// Sinusoid mean with an isotropic perturbation of covariance amplitude · I.
struct SinusoidPrior {
  Eigen::Index n = 128;
  double amplitude = 2.0;

  Vector mean() const { return sinusoid_mean(n, amplitude); }
  Matrix covariance() const { return amplitude * Matrix::Identity(n, n); }
};

struct GaussianPrior {
  Vector mean;
  Matrix covariance;
};

GaussianPrior to_gaussian(const SinusoidPrior& p);

/// Gaussian blur of `d` taps centred circularly at index 0, with profile
/// exp(−(o − θ)²/(2 w²)) on the integer offsets o, renormalized to sum 1.
/// The shift θ ~ N(0, σθ²); the width w is `spread` or, when spread_std > 0,
/// lognormal with mean `spread` and standard deviation `spread_std`.
struct ShiftedKernelEnsemble {
  Eigen::Index n = 128;
  Eigen::Index d = 21;
  double spread = 0.5;
  double sigma_theta = 0.4;
  double spread_std = 0.0;

  void validate() const;
};

/// Support offsets of the kernel: d consecutive integers around 0.
std::vector<Eigen::Index> kernel_offsets(Eigen::Index d);

/// The kernel for one (shift, width) pair, zero-padded to length n.
Vector kernel_profile(const ShiftedKernelEnsemble& ens, double theta, double width);

/// One random kernel; draws θ then (if randomized) the width from rng.
Vector sample_kernel(const ShiftedKernelEnsemble& ens, Rng& rng);
Vector sample_kernel(const ShiftedKernelEnsemble& ens, std::uint64_t seed);

/// Exact kernel mean and covariance by tensor Gauss-Hermite quadrature over
/// the shift and the log-width.
KernelStats kernel_stats(const ShiftedKernelEnsemble& ens, int order = 160);

/// Nodes and weights of the probabilists' Gauss-Hermite rule:
/// E[f(Z)] ≈ Σ w_i f(x_i) for Z ~ N(0, 1), with Σ w_i = 1.
std::pair<Vector, Vector> gauss_hermite(int order);

/// N draws from N(mean, covariance) as the columns of an n×N matrix;
/// sample j uses Rng::substream(seed, j, StreamTag::signal).
Matrix sample_signals(const GaussianPrior& prior, Eigen::Index count, std::uint64_t seed);

/// Everything needed to regenerate a dataset bit-identically.
struct DatasetManifest {
  std::uint64_t seed = 0;
  Eigen::Index n = 128;
  Eigen::Index n_train = 1000;
  double amplitude = 2.0;
  Eigen::Index d = 21;
  double spread = 0.5;
  double spread_std = 0.0;
  double sigma_theta = 0.4;
  double sigma_n = 0.5;
  /// Source-condition exponent; none means the sinusoid prior.
  std::optional<double> alpha;
  std::string generator_version = kGeneratorVersion;

  ShiftedKernelEnsemble ensemble() const { return {n, d, spread, sigma_theta, spread_std}; }

  std::string to_string() const;
  static DatasetManifest parse(const std::string& text);
  static DatasetManifest load(const std::filesystem::path& path);
};

struct Dataset {
  SampleSet samples;
  DatasetManifest manifest;
};

/// Signal prior a manifest describes: the sinusoid prior, or the Gaussian with
/// sinusoid mean and Cxx = E[AᵀA]^α for the manifest's kernel ensemble.
GaussianPrior manifest_prior(const DatasetManifest& manifest);

/// Exact moments of the blind model induced by a prior, kernel ensemble and
/// noise level σn (β = σn²).
ProblemMoments induced_moments(const GaussianPrior& prior, const ShiftedKernelEnsemble& ens, double sigma_n);

/// Independent (x_j, k_j, ε_j) per sample, y_j = k_j ∗ x_j + σn ε_j. Sample j
/// draws from substreams (seed, j, signal | kernel | noise), so a dataset of
/// size N is a prefix of any larger one with the same seed.
SampleSet generate_samples(const GaussianPrior& prior, const ShiftedKernelEnsemble& ens, double sigma_n,
                           Eigen::Index count, std::uint64_t seed);

Dataset generate_dataset(const DatasetManifest& manifest);

/// Writes manifest.txt, x.csv and y.csv into dir.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

}  // namespace blmmse

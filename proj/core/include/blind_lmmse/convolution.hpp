#pragma once

// Periodic 1D convolution operators and their statistics.
//
// Index convention (0-based): B_s is the circulant permutation with ones
// where (t - q) mod n == s, so B_0 = I and B_s shifts a signal forward by s.
// T(k) = Σ_s k_s B_s and (T(k) x)_t = Σ_s k_s x_{(t - s) mod n}, which gives
// circular_convolve(k, e_0) == k.

#include "blind_lmmse/linalg.hpp"
#include "blind_lmmse/moments.hpp"
#include "blind_lmmse/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace blmmse {

/// Mean kernel and kernel covariance, both zero-padded to the signal length.
struct KernelStats {
  Vector theta_k;
  Matrix c_kk;

  Eigen::Index n() const noexcept { return theta_k.size(); }
  /// Symmetric PSD check on c_kk; throws InvalidMomentsError.
  void validate() const;
};

/// The family {B_0, ..., B_{n-1}} of circulant shift matrices.
class ShiftBasis {
 public:
  explicit ShiftBasis(Eigen::Index n);

  Eigen::Index size() const noexcept { return n_; }
  /// Dense B_s.
  Matrix matrix(Eigen::Index s) const;
  /// Index r with B_s B_t = B_r.
  Eigen::Index product_index(Eigen::Index s, Eigen::Index t) const noexcept;

 private:
  Eigen::Index n_;
};

Matrix shift_matrix(Eigen::Index n, Eigen::Index s);

/// T(k) = Σ_s k_s B_s.
Matrix conv_matrix_from_kernel(const Vector& k);

/// P = [vec(B_0), ..., vec(B_{n-1})], n²×n, so vec(T(k)) = P k (row-major vec).
Matrix vec_lift_matrix(Eigen::Index n);

/// y_t = Σ_s k_s x_{(t - s) mod n}.
Vector circular_convolve(const Vector& k, const Vector& x);

/// T(θ_k).
Matrix operator_mean_from_kernel(const KernelStats& ks);

/// Ensemble of T(k) with Caa = P C_kk Pᵀ, stored through C_kk only.
OperatorEnsemble operator_cov_from_kernel(const KernelStats& ks);

/// Singular values of T(k) in the fixed frequency order
/// [0, 1, n-1, 2, n-2, ...]: DC first, then conjugate pairs by increasing
/// frequency. The value at frequency f is |Σ_s k_s e^{-2πi f s / n}|.
Vector circulant_singular_values(const Vector& k);

/// The frequency visited at each position of the order above.
std::vector<Eigen::Index> circulant_frequency_order(Eigen::Index n);

/// Draws one kernel of length n from a generator.
using KernelSampler = std::function<Vector(Rng&)>;

/// Monte-Carlo per-index moments of the circulant singular values over
/// n_draws kernels. Draw j uses Rng::substream(seed, j, StreamTag::kernel).
std::vector<SingularMoment> singular_moments_circulant(const KernelSampler& sampler, Eigen::Index n,
                                                       std::size_t n_draws, std::uint64_t seed);

/// Same, with Gaussian kernels k ~ N(θ_k, C_kk).
std::vector<SingularMoment> singular_moments_circulant(const KernelStats& ks, std::size_t n_draws,
                                                       std::uint64_t seed);

}  // namespace blmmse

#pragma once

#include "blind_lmmse/linalg.hpp"
#include "blind_lmmse/moments.hpp"

namespace blmmse {

/// An affine estimator ẑ = L w + b.
struct AffineEstimator {
  Matrix gain;     ///< L, out×m
  Vector offset;   ///< b = θ_z − L θ_w
  double lambda = 0.0;
  /// Condition number of the regularized system that was solved.
  double condition_number = 1.0;

  Vector apply(const Vector& w) const { return gain * w + offset; }
  /// Applies the estimator to every column of ws.
  Matrix apply_columns(const Matrix& ws) const { return (gain * ws).colwise() + offset; }
};

/// Paired training samples stored column-wise, with the true means used for
/// centering.
struct SampleSet {
  Matrix xs;  ///< n×N
  Matrix ys;  ///< m×N
  Vector theta_x;
  Vector theta_y;

  Eigen::Index size() const noexcept { return xs.cols(); }
  void check() const;
};

enum class Centering {
  true_mean,       ///< center with the stored θx, θy
  empirical_mean,  ///< center with the sample means
};

/// L = C_zw (C_ww + λI)⁻¹, b = θ_z − L θ_w.
///
/// With λ = 0 and cond(C_ww) > kMaxCondition the pseudo-inverse is used when
/// C_zw vanishes on the numerical null space of C_ww (the orthogonality
/// principle guarantees this for exact moments); otherwise IllConditionedError.
AffineEstimator lmmse_general(const Matrix& c_zw, const Matrix& c_ww, const Vector& theta_z,
                              const Vector& theta_w, double lambda);

/// Non-blind estimator for a fixed operator a and noise β I.
AffineEstimator lmmse_nonblind(const Matrix& a, const Matrix& c_xx, double beta, const Vector& theta_x,
                               double lambda);

/// Signal estimator under the blind model: L = Cxx Θᵀ (Cyy + λI)⁻¹.
AffineEstimator lmmse_blind_signal(const ProblemMoments& pm, double lambda);

/// Generalized Tikhonov solution with weight Cp = kron + D + (β + λ)I,
/// computed through the normal equations (Cxx⁻¹ + Θᵀ Cp⁻¹ Θ) z = ...
/// Throws PreconditionError when Cxx is singular.
Vector tikhonov_signal(const ProblemMoments& pm, const Vector& y, double lambda);

/// Operator estimator â = θa + Cay (Cyy + λI)⁻¹ (y − θy), output length mn.
AffineEstimator lmmse_operator(const ProblemMoments& pm, double lambda);

/// Generalized Tikhonov solution for vec(A) with Cp = Θ Cxx Θᵀ + D + (β + λ)I.
/// Throws PreconditionError when the assembled Caa is singular.
Vector tikhonov_operator(const ProblemMoments& pm, const Vector& y, double lambda);

struct JointEstimate {
  Vector signal;
  Vector op;
};

/// Minimizer of the joint expected loss over (signal, operator) estimators,
/// which decouples into the two standalone estimators.
JointEstimate joint_estimate(const ProblemMoments& pm, const Vector& y, double lambda);

/// Regularized empirical estimator built from sample covariances.
/// λ = 0 with a rank-deficient empirical Cyy throws IllConditionedError.
AffineEstimator empirical_lmmse(const SampleSet& samples, double lambda,
                                Centering centering = Centering::true_mean);

}  // namespace blmmse

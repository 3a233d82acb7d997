#pragma once

#include "blind_lmmse/linalg.hpp"
#include "blind_lmmse/moments.hpp"
#include "blind_lmmse/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace blmmse {

/// M^α through the eigendecomposition; eigenvalues in [−1e-10‖M‖, 0] are
/// clamped to zero and more negative ones are rejected. M⁰ = I.
Matrix matrix_power_psd(const Matrix& m, double alpha);

/// Prior covariance obeying the source condition Cxx = E[AᵀA]^α.
struct SourceConditionPrior {
  double alpha = 1.0;
  Matrix base;   ///< E[AᵀA], exact or empirical
  Matrix c_xx;   ///< base^α
  bool exact = true;
};

/// Exact route: base = ΘᵀΘ + Σ_i C_{A_i A_i}.
SourceConditionPrior source_condition_prior(const OperatorEnsemble& op, double alpha);

/// Draws one forward matrix.
using OperatorSampler = std::function<Matrix(Rng&)>;

/// Empirical route: base = (1/N) Σ_j A_jᵀ A_j over n_draws operators, draw j
/// from Rng::substream(seed, j, StreamTag::operator_draw).
SourceConditionPrior source_condition_prior(const OperatorSampler& sampler, double alpha,
                                            std::size_t n_draws, std::uint64_t seed);

/// C₁(α) = (α+½)^{(α+½)/(α+1)} / (α+1), the maximum of x^{α+½}/(x^{α+1}+1).
double constant_c1(double alpha);
/// C₂(α) = (α/(α+2))^{α/(α+1)} (1 + α/(α+2))⁻².
double constant_c2(double alpha);

struct SpectrumStats {
  double gamma = 0.0;                ///< smallest eigenvalue of Cyy
  std::vector<double> cv2;           ///< Var(ς_i)/E[ς_i]²
  std::vector<double> second_moment; ///< E[ς_i²]
  std::vector<double> spread_ratio;  ///< Var(ς_i)/E[ς_i²] = CV²/(1+CV²)
};

/// Requires singular-value moments on pm.op (shared basis, or attached).
SpectrumStats spectrum_stats(const ProblemMoments& pm);

/// Everything a bound was evaluated with. NaN marks "not applicable".
struct BoundConstants {
  double k = NAN;
  double gamma = NAN;
  double rho_x = NAN;
  double rho_y = NAN;
  double lambda = NAN;
  double xi = NAN;
  double d = NAN;
  double c1 = NAN;
  double c2 = NAN;
  double cxy_norm = NAN;
};

struct BoundReport {
  double term_noise = 0.0;
  double term_operator = 0.0;
  double term_sampling = 0.0;
  double total = 0.0;
  BoundConstants constants;
  /// Empty when every stated precondition holds, otherwise which ones failed.
  std::string precondition_notes;
};

/// How the constants of the approximation bound are instantiated.
enum class ApproxConstants {
  statement,      ///< constants absorbed, as in the bound statement
  proof_printed,  ///< (C₁ + C₂) on the noise term, as the proof's last line prints
  proof_squared,  ///< (C₁² + C₂), squaring the operator-norm bound
};

/// m(β+λ)^{α/(α+1)} (times the mode's constant) + Σ_{i<m} E[ς_i²]^α Var(ς_i)/E[ς_i²].
BoundReport approx_bound_rhs(const std::vector<SingularMoment>& moments, Eigen::Index m, double beta,
                             double alpha, double lambda,
                             ApproxConstants mode = ApproxConstants::statement);

/// Same, reading the singular moments, m and β from pm.
BoundReport approx_bound_rhs(const ProblemMoments& pm, double alpha, double lambda,
                             ApproxConstants mode = ApproxConstants::statement);

/// C₁ (β+λ)^{−(1/2)/(α+1)}, the operator-norm bound on L^λ.
double lmmse_norm_bound(double alpha, double beta, double lambda);

/// m (C₁ + C₂) β^{α/(α+1)} for a fixed operator.
double nonblind_bound_rhs(double alpha, double beta, Eigen::Index m);

/// Norms and conditioning entering the sampling bounds.
struct SamplingContext {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double cyy_norm = 0.0;
  double cxx_norm = 0.0;
  double cxy_norm = 0.0;
  double gamma = 0.0;
};

SamplingContext sampling_context(const ProblemMoments& pm);

/// 1.1 · max_k ‖s_k − mean‖² over the columns of samples.
double estimate_rho(const Matrix& samples, const Vector& mean);

/// K = ln(n+m) · 4 max(ρx, ρy) ‖Cyy‖ / (3 ‖Cxx‖²).
double sample_complexity_k(const SamplingContext& ctx, double rho_x, double rho_y);

/// Smallest integer N strictly above
/// ln((n+m)/d) · 2 max(ρx, ρy) ‖Cyy‖ (3+2ξ) / (3 ξ² ‖Cxx‖²).
/// Requires 0 < ξ < λ + γ, d > 0 and ‖Cyy‖ ≥ ‖Cxx‖.
std::uint64_t sampling_threshold(const SamplingContext& ctx, double rho_x, double rho_y, double xi,
                                 double d, double lambda = 0.0);

struct ThresholdMode {
  double xi;
  double d;
};
struct RateMode {};

/// High-probability bound on E_y‖L^λ y − L̂^λ y‖². Threshold mode requires
/// N above sampling_threshold; rate mode requires N > max(K, 16K/(γ+λ)²)
/// and λ + γ ≥ 4√(K/N). Violations throw PreconditionError naming the
/// failing inequality.
BoundReport sampling_bound_rhs(const SamplingContext& ctx, double rho_x, double rho_y, double lambda,
                               std::uint64_t n_samples, ThresholdMode mode);
BoundReport sampling_bound_rhs(const SamplingContext& ctx, double rho_x, double rho_y, double lambda,
                               std::uint64_t n_samples, RateMode mode);

/// Approximation bound (statement mode) plus m C/((γ+λ)N)(1 + (γ+λ)⁻² + (γ+λ)⁻¹)
/// with C = 9‖Cxy‖²K. Unmet preconditions (N > K, λ+γ ≥ 4√(K/N)) are
/// recorded in precondition_notes instead of throwing.
BoundReport main_bound_rhs(const ProblemMoments& pm, double alpha, double lambda, double rho_x,
                           double rho_y, std::uint64_t n_samples);

/// λ = max(1e-6, 4√(K/N) − γ): the smallest regularization meeting the
/// rate bound's λ + γ ≥ 4√(K/N), nudged up by a relative 1e-9 so that
/// N > 16K/(γ+λ)² also holds strictly.
double default_lambda(double k, double gamma, std::uint64_t n_samples);

}  // namespace blmmse

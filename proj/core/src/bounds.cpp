#include "blind_lmmse/bounds.hpp"

#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace blmmse {

namespace {

using Index = Eigen::Index;

void append_note(std::string& notes, const std::string& note) {
  if (!notes.empty()) notes += "; ";
  notes += note;
}

double sampling_shape(double g, double a, double b) { return 1.0 + a / (g * g) + b / g; }

}  // namespace

Matrix matrix_power_psd(const Matrix& m, double alpha) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_power_psd needs a square matrix");
  if (!is_symmetric(m, kSymmetryRelTol)) throw InvalidMomentsError("symmetric", "matrix_power_psd input is asymmetric");
  if (alpha == 0.0) return Matrix::Identity(m.rows(), m.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10 * scale) {
      throw InvalidMomentsError("psd", fmt::format("eigenvalue {} below tolerance", ev(i)));
    }
    ev(i) = ev(i) <= 0.0 ? 0.0 : std::pow(ev(i), alpha);
  }
  const Matrix& v = es.eigenvectors();
  Matrix out = v * ev.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

SourceConditionPrior source_condition_prior(const OperatorEnsemble& op, double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("source condition exponent must be positive");
  SourceConditionPrior prior;
  prior.alpha = alpha;
  prior.base = op.expected_gram();
  prior.base = 0.5 * (prior.base + prior.base.transpose());
  prior.c_xx = matrix_power_psd(prior.base, alpha);
  prior.exact = true;
  return prior;
}

SourceConditionPrior source_condition_prior(const OperatorSampler& sampler, double alpha,
                                            std::size_t n_draws, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw PreconditionError("source condition exponent must be positive");
  if (n_draws < 2) throw PreconditionError("empirical source condition needs at least 2 draws");
  std::vector<Matrix> grams(n_draws);
  parallel_for(n_draws, [&](std::size_t j) {
    Rng rng = Rng::substream(seed, j, StreamTag::operator_draw);
    const Matrix a = sampler(rng);
    grams[j] = a.transpose() * a;
  });
  Matrix base = Matrix::Zero(grams[0].rows(), grams[0].cols());
  for (const auto& g : grams) base += g;
  base /= static_cast<double>(n_draws);
  SourceConditionPrior prior;
  prior.alpha = alpha;
  prior.base = 0.5 * (base + base.transpose());
  prior.c_xx = matrix_power_psd(prior.base, alpha);
  prior.exact = false;
  return prior;
}

double constant_c1(double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be positive");
  return std::pow(alpha + 0.5, (alpha + 0.5) / (alpha + 1.0)) / (alpha + 1.0);
}

double constant_c2(double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be positive");
  const double r = alpha / (alpha + 2.0);
  return std::pow(r, alpha / (alpha + 1.0)) / ((1.0 + r) * (1.0 + r));
}

SpectrumStats spectrum_stats(const ProblemMoments& pm) {
  const auto& moments = pm.op.singular_moments();
  if (!moments) {
    throw PreconditionError("spectrum_stats requires singular-value moments (shared singular structure)");
  }
  SpectrumStats out;
  out.gamma = Eigen::SelfAdjointEigenSolver<Matrix>(cov_obs_blind(pm).total, Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .minCoeff();
  for (std::size_t i = 0; i < moments->size(); ++i) {
    const SingularMoment& s = (*moments)[i];
    if (!(s.mean > 0.0)) {
      throw InvalidMomentsError("singular_mean_positive", fmt::format("E[s_{}] = {}", i, s.mean));
    }
    out.cv2.push_back(s.cv2());
    out.second_moment.push_back(s.second_moment());
    out.spread_ratio.push_back(s.variance / s.second_moment());
  }
  return out;
}

BoundReport approx_bound_rhs(const std::vector<SingularMoment>& moments, Index m, double beta,
                             double alpha, double lambda, ApproxConstants mode) {
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  if (!(beta >= 0.0)) throw PreconditionError("beta must be nonnegative");
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be positive");
  if (static_cast<Index>(moments.size()) < m) throw DimensionError("need at least m singular-value moments");

  BoundReport r;
  r.constants.lambda = lambda;
  r.constants.c1 = constant_c1(alpha);
  r.constants.c2 = constant_c2(alpha);
  double factor = 1.0;
  if (mode == ApproxConstants::proof_printed) factor = r.constants.c1 + r.constants.c2;
  if (mode == ApproxConstants::proof_squared) factor = r.constants.c1 * r.constants.c1 + r.constants.c2;
  r.term_noise = factor * static_cast<double>(m) * std::pow(beta + lambda, alpha / (alpha + 1.0));

  for (Index i = 0; i < m; ++i) {
    const SingularMoment& s = moments[static_cast<std::size_t>(i)];
    if (!(s.mean > 0.0)) {
      throw InvalidMomentsError("singular_mean_positive", fmt::format("E[s_{}] = {}", i, s.mean));
    }
    const double e2 = s.second_moment();
    r.term_operator += std::pow(e2, alpha) * std::max(0.0, s.variance) / e2;
  }
  r.total = r.term_noise + r.term_operator;
  return r;
}

BoundReport approx_bound_rhs(const ProblemMoments& pm, double alpha, double lambda, ApproxConstants mode) {
  const auto& moments = pm.op.singular_moments();
  if (!moments) {
    throw PreconditionError("approximation bound requires shared singular structure (singular-value moments)");
  }
  return approx_bound_rhs(*moments, pm.m(), pm.beta, alpha, lambda, mode);
}

double lmmse_norm_bound(double alpha, double beta, double lambda) {
  if (!(beta + lambda > 0.0)) throw PreconditionError("beta + lambda must be positive");
  return constant_c1(alpha) * std::pow(beta + lambda, -0.5 / (alpha + 1.0));
}

double nonblind_bound_rhs(double alpha, double beta, Index m) {
  if (!(beta >= 0.0)) throw PreconditionError("beta must be nonnegative");
  return static_cast<double>(m) * (constant_c1(alpha) + constant_c2(alpha)) *
         std::pow(beta, alpha / (alpha + 1.0));
}

SamplingContext sampling_context(const ProblemMoments& pm) {
  const Matrix cyy = cov_obs_blind(pm).total;
  SamplingContext ctx;
  ctx.n = pm.n();
  ctx.m = pm.m();
  ctx.cyy_norm = spectral_norm(cyy);
  ctx.cxx_norm = spectral_norm(pm.c_xx);
  ctx.cxy_norm = spectral_norm(cross_cov_signal_obs(pm));
  ctx.gamma = Eigen::SelfAdjointEigenSolver<Matrix>(cyy, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return ctx;
}

double estimate_rho(const Matrix& samples, const Vector& mean) {
  if (samples.cols() < 1) throw PreconditionError("estimate_rho needs samples");
  if (samples.rows() != mean.size()) throw DimensionError("sample and mean dimensions differ");
  return 1.1 * (samples.colwise() - mean).colwise().squaredNorm().maxCoeff();
}

double sample_complexity_k(const SamplingContext& ctx, double rho_x, double rho_y) {
  if (!(ctx.cxx_norm > 0.0)) throw PreconditionError("‖Cxx‖ must be positive");
  return std::log(static_cast<double>(ctx.n + ctx.m)) * 4.0 * std::max(rho_x, rho_y) * ctx.cyy_norm /
         (3.0 * ctx.cxx_norm * ctx.cxx_norm);
}

std::uint64_t sampling_threshold(const SamplingContext& ctx, double rho_x, double rho_y, double xi,
                                 double d, double lambda) {
  if (!(xi > 0.0)) throw PreconditionError("xi must be positive");
  if (!(xi < lambda + ctx.gamma)) throw PreconditionError("xi < lambda + gamma violated");
  if (!(d > 0.0)) throw PreconditionError("d must be positive");
  if (ctx.cyy_norm < ctx.cxx_norm) throw PreconditionError("‖Cyy‖ >= ‖Cxx‖ violated");
  if (!(ctx.cxx_norm > 0.0)) throw PreconditionError("‖Cxx‖ must be positive");
  const double value = std::log(static_cast<double>(ctx.n + ctx.m) / d) * 2.0 * std::max(rho_x, rho_y) *
                       ctx.cyy_norm * (3.0 + 2.0 * xi) / (3.0 * xi * xi * ctx.cxx_norm * ctx.cxx_norm);
  if (value < 0.0) return 1;
  return static_cast<std::uint64_t>(std::floor(value)) + 1;
}

BoundReport sampling_bound_rhs(const SamplingContext& ctx, double rho_x, double rho_y, double lambda,
                               std::uint64_t n_samples, ThresholdMode mode) {
  const std::uint64_t threshold = sampling_threshold(ctx, rho_x, rho_y, mode.xi, mode.d, lambda);
  if (n_samples < threshold) {
    throw PreconditionError(
        fmt::format("N > sampling threshold violated: N = {}, need at least {}", n_samples, threshold));
  }
  const double g = ctx.gamma + lambda;
  const double xi = mode.xi;
  BoundReport r;
  r.constants = {sample_complexity_k(ctx, rho_x, rho_y), ctx.gamma, rho_x, rho_y, lambda, xi, mode.d,
                 NAN, NAN, ctx.cxy_norm};
  r.term_sampling = static_cast<double>(ctx.m) * ctx.cxy_norm * ctx.cxy_norm * xi * xi / g *
                    (1.0 + (1.0 + xi) * (1.0 + xi) / ((g - xi) * (g - xi)) + 2.0 * (1.0 + xi) / (g - xi));
  r.total = r.term_sampling;
  return r;
}

BoundReport sampling_bound_rhs(const SamplingContext& ctx, double rho_x, double rho_y, double lambda,
                               std::uint64_t n_samples, RateMode) {
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  const double k = sample_complexity_k(ctx, rho_x, rho_y);
  const double g = ctx.gamma + lambda;
  const double n = static_cast<double>(n_samples);
  if (!(n > k)) throw PreconditionError(fmt::format("N > K violated: N = {}, K = {}", n_samples, k));
  if (!(n > 16.0 * k / (g * g))) {
    throw PreconditionError(fmt::format("N > 16K/(gamma+lambda)^2 violated: N = {}, 16K/(gamma+lambda)^2 = {}",
                                        n_samples, 16.0 * k / (g * g)));
  }
  if (!(g >= 4.0 * std::sqrt(k / n))) {
    throw PreconditionError(fmt::format("lambda + gamma >= 4 sqrt(K/N) violated: {} < {}", g,
                                        4.0 * std::sqrt(k / n)));
  }
  BoundReport r;
  r.constants = {k, ctx.gamma, rho_x, rho_y, lambda, 2.0 * std::sqrt(k / n), 1.0 / static_cast<double>(ctx.n + ctx.m),
                 NAN, NAN, ctx.cxy_norm};
  r.term_sampling = static_cast<double>(ctx.m) * 9.0 * ctx.cxy_norm * ctx.cxy_norm * k / (g * n) *
                    sampling_shape(g, 16.0, 8.0);
  r.total = r.term_sampling;
  return r;
}

BoundReport main_bound_rhs(const ProblemMoments& pm, double alpha, double lambda, double rho_x, double rho_y,
                           std::uint64_t n_samples) {
  BoundReport r = approx_bound_rhs(pm, alpha, lambda, ApproxConstants::statement);
  const SamplingContext ctx = sampling_context(pm);
  const double k = sample_complexity_k(ctx, rho_x, rho_y);
  const double g = ctx.gamma + lambda;
  const double n = static_cast<double>(n_samples);
  if (!(n_samples > 0)) throw PreconditionError("N must be positive");
  if (!(n > k)) append_note(r.precondition_notes, fmt::format("N > K fails (N = {}, K = {:.6g})", n_samples, k));
  if (!(g >= 4.0 * std::sqrt(k / n))) {
    append_note(r.precondition_notes, fmt::format("lambda + gamma >= 4 sqrt(K/N) fails ({:.6g} < {:.6g})", g,
                                                  4.0 * std::sqrt(k / n)));
  }
  r.constants.k = k;
  r.constants.gamma = ctx.gamma;
  r.constants.rho_x = rho_x;
  r.constants.rho_y = rho_y;
  r.constants.cxy_norm = ctx.cxy_norm;
  const double c = 9.0 * ctx.cxy_norm * ctx.cxy_norm * k;
  r.term_sampling = static_cast<double>(ctx.m) * c / (g * n) * sampling_shape(g, 1.0, 1.0);
  r.total = r.term_noise + r.term_operator + r.term_sampling;
  return r;
}

double default_lambda(double k, double gamma, std::uint64_t n_samples) {
  if (n_samples == 0) throw PreconditionError("N must be positive");
  // The relative margin keeps N > 16K/(γ+λ)² strict at the boundary.
  return std::max(1e-6, 4.0 * std::sqrt(k / static_cast<double>(n_samples)) * (1.0 + 1e-9) - gamma);
}

}  // namespace blmmse

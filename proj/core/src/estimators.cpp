#include "blind_lmmse/estimators.hpp"

#include "blind_lmmse/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace blmmse {

namespace {

using Index = Eigen::Index;

// Solves X (C_ww + λI) = C_zw for X.
Matrix solve_right(const Matrix& c_zw, const Matrix& c_ww, double lambda, bool allow_pinv,
                   double& condition) {
  const Index m = c_ww.rows();
  Matrix s = c_ww;
  s.diagonal().array() += lambda;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw IllConditionedError("eigendecomposition failed", INFINITY);
  const Vector& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double bottom = ev.minCoeff();
  condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
  if (top == 0.0) condition = std::numeric_limits<double>::infinity();

  if (condition <= kMaxCondition) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() == Eigen::Success) return llt.solve(c_zw.transpose()).transpose();
  }

  if (allow_pinv && lambda == 0.0 && top > 0.0) {
    const double cut = 1e-14 * top;
    Index kept = 0;
    for (Index i = 0; i < m; ++i) kept += ev(i) > cut ? 1 : 0;
    const Matrix v_keep = es.eigenvectors().rightCols(kept);
    const Matrix v_null = es.eigenvectors().leftCols(m - kept);
    const double zw_norm = c_zw.norm();
    if (m - kept == 0 || (c_zw * v_null).norm() <= 1e-10 * std::max(zw_norm, 1e-300)) {
      const Vector inv = ev.tail(kept).cwiseInverse();
      return c_zw * v_keep * inv.asDiagonal() * v_keep.transpose();
    }
  }
  throw IllConditionedError(
      fmt::format("ill-conditioned system: cond(C_ww + {}·I) = {:.3e} exceeds {:.0e}; use lambda > 0",
                  lambda, condition, kMaxCondition),
      condition);
}

AffineEstimator make_estimator(const Matrix& c_zw, const Matrix& c_ww, const Vector& theta_z,
                               const Vector& theta_w, double lambda, bool allow_pinv) {
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  if (c_ww.rows() != c_ww.cols()) throw DimensionError("C_ww must be square");
  if (c_zw.cols() != c_ww.rows()) throw DimensionError("C_zw columns must match C_ww");
  if (theta_z.size() != c_zw.rows() || theta_w.size() != c_ww.rows()) {
    throw DimensionError("mean vectors do not match the covariance shapes");
  }
  AffineEstimator est;
  est.lambda = lambda;
  if (std::isinf(lambda)) {
    est.gain = Matrix::Zero(c_zw.rows(), c_zw.cols());
    est.condition_number = 1.0;
  } else {
    est.gain = solve_right(c_zw, c_ww, lambda, allow_pinv, est.condition_number);
  }
  est.offset = theta_z - est.gain * theta_w;
  return est;
}

// (S)⁻¹ B for symmetric S; rejects numerically singular S.
Matrix spd_solve(const Matrix& s, const Matrix& b, const char* what) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw PreconditionError(fmt::format("{} is not positive definite", what));
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw PreconditionError(fmt::format("{} is singular to working precision", what));
  }
  return llt.solve(b);
}

}  // namespace

void SampleSet::check() const {
  if (xs.cols() < 1) throw PreconditionError("sample set is empty");
  if (ys.cols() != xs.cols()) throw DimensionError("xs and ys hold different sample counts");
  if (theta_x.size() != xs.rows() || theta_y.size() != ys.rows()) {
    throw DimensionError("sample means do not match sample dimensions");
  }
}

AffineEstimator lmmse_general(const Matrix& c_zw, const Matrix& c_ww, const Vector& theta_z,
                              const Vector& theta_w, double lambda) {
  return make_estimator(c_zw, c_ww, theta_z, theta_w, lambda, /*allow_pinv=*/true);
}

AffineEstimator lmmse_nonblind(const Matrix& a, const Matrix& c_xx, double beta, const Vector& theta_x,
                               double lambda) {
  if (c_xx.rows() != a.cols() || c_xx.cols() != a.cols() || theta_x.size() != a.cols()) {
    throw DimensionError("operator and prior dimensions differ");
  }
  if (!(beta >= 0.0)) throw PreconditionError("beta must be nonnegative");
  const Matrix c_xy = c_xx * a.transpose();
  Matrix c_yy = a * c_xy;
  c_yy.diagonal().array() += beta;
  return lmmse_general(c_xy, c_yy, theta_x, a * theta_x, lambda);
}

AffineEstimator lmmse_blind_signal(const ProblemMoments& pm, double lambda) {
  const BlindObsCov cov = cov_obs_blind(pm);
  return lmmse_general(cross_cov_signal_obs(pm), cov.total, pm.theta_x, obs_mean(pm), lambda);
}

Vector tikhonov_signal(const ProblemMoments& pm, const Vector& y, double lambda) {
  pm.check_dimensions();
  if (y.size() != pm.m()) throw DimensionError("observation length must be m");
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  const BlindObsCov cov = cov_obs_blind(pm);
  Matrix cp = cov.kron_term + cov.d_term;
  cp.diagonal().array() += pm.beta + lambda;
  const Matrix& theta = pm.op.mean_op();

  const Index n = pm.n();
  const Matrix cxx_inv = spd_solve(pm.c_xx, Matrix::Identity(n, n), "Cxx");
  const Matrix cp_inv_theta = spd_solve(cp, theta, "Cp");
  const Matrix normal = cxx_inv + theta.transpose() * cp_inv_theta;
  const Vector rhs = cp_inv_theta.transpose() * (y - theta * pm.theta_x);
  return pm.theta_x + spd_solve(normal, rhs, "Tikhonov normal matrix");
}

AffineEstimator lmmse_operator(const ProblemMoments& pm, double lambda) {
  const BlindObsCov cov = cov_obs_blind(pm);
  return lmmse_general(cov_op_obs(pm), cov.total, operator_mean_vec(pm), obs_mean(pm), lambda);
}

Vector tikhonov_operator(const ProblemMoments& pm, const Vector& y, double lambda) {
  pm.check_dimensions();
  if (y.size() != pm.m()) throw DimensionError("observation length must be m");
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  const Index m = pm.m();
  const Index mn = m * pm.n();
  const Matrix& theta = pm.op.mean_op();

  Matrix cp = theta * pm.c_xx * theta.transpose() + interaction_matrix(pm);
  cp.diagonal().array() += pm.beta + lambda;
  const Matrix g = identity_kron_row(m, pm.theta_x);
  const Matrix caa_inv = spd_solve(pm.op.assemble_caa(), Matrix::Identity(mn, mn), "Caa");
  const Matrix cp_inv_g = spd_solve(cp, g, "Cp");
  const Matrix normal = caa_inv + g.transpose() * cp_inv_g;
  const Vector rhs = cp_inv_g.transpose() * (y - theta * pm.theta_x);
  return vec_rows(theta) + spd_solve(normal, rhs, "Tikhonov normal matrix");
}

JointEstimate joint_estimate(const ProblemMoments& pm, const Vector& y, double lambda) {
  if (y.size() != pm.m()) throw DimensionError("observation length must be m");
  return {lmmse_blind_signal(pm, lambda).apply(y), lmmse_operator(pm, lambda).apply(y)};
}

AffineEstimator empirical_lmmse(const SampleSet& samples, double lambda, Centering centering) {
  samples.check();
  const double count = static_cast<double>(samples.size());
  Vector cx = samples.theta_x;
  Vector cy = samples.theta_y;
  if (centering == Centering::empirical_mean) {
    cx = samples.xs.rowwise().mean();
    cy = samples.ys.rowwise().mean();
  }
  const Matrix xc = samples.xs.colwise() - cx;
  const Matrix yc = samples.ys.colwise() - cy;
  const Matrix c_xy = xc * yc.transpose() / count;
  Matrix c_yy = Matrix::Zero(yc.rows(), yc.rows());
  c_yy.selfadjointView<Eigen::Lower>().rankUpdate(yc, 1.0 / count);
  c_yy = c_yy.selfadjointView<Eigen::Lower>();
  return make_estimator(c_xy, c_yy, cx, cy, lambda, /*allow_pinv=*/false);
}

}  // namespace blmmse

#include "blind_lmmse/instances.hpp"

#include "blind_lmmse/errors.hpp"

#include <cmath>

namespace blmmse {

namespace {

using Index = Eigen::Index;

Matrix gaussian_matrix(Index r, Index c, Rng& rng) {
  Matrix out(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) out(i, j) = rng.normal();
  }
  return out;
}

}  // namespace

Matrix random_spd(Index k, Rng& rng, double floor) {
  const Matrix b = gaussian_matrix(k, k, rng);
  Matrix s = b * b.transpose() / static_cast<double>(k);
  s.diagonal().array() += floor;
  return 0.5 * (s + s.transpose());
}

ProblemMoments random_problem(Index n, Index m, OperatorStructure tag, Rng& rng) {
  Vector theta_x = gaussian_matrix(n, 1, rng);
  Matrix c_xx = random_spd(n, rng);
  Matrix theta = gaussian_matrix(m, n, rng) / std::sqrt(static_cast<double>(n));
  const double beta = 0.1 + 0.9 * rng.uniform();
  const double scale = 0.3;

  OperatorEnsemble op = OperatorEnsemble::deterministic(theta);
  switch (tag) {
    case OperatorStructure::unstructured:
      op = OperatorEnsemble::from_full_covariance(theta, scale * random_spd(m * n, rng), tag);
      break;
    case OperatorStructure::independent_rows: {
      std::vector<Matrix> blocks(static_cast<std::size_t>(m * m), Matrix::Zero(n, n));
      for (Index i = 0; i < m; ++i) blocks[static_cast<std::size_t>(i * m + i)] = scale * random_spd(n, rng);
      op = OperatorEnsemble::from_row_covariances(theta, std::move(blocks), tag);
      break;
    }
    case OperatorStructure::independent_columns: {
      std::vector<Matrix> blocks(static_cast<std::size_t>(m * m), Matrix::Zero(n, n));
      for (Index k = 0; k < n; ++k) {
        const Matrix col_cov = scale * random_spd(m, rng);
        for (Index i = 0; i < m; ++i) {
          for (Index j = 0; j < m; ++j) blocks[static_cast<std::size_t>(i * m + j)](k, k) = col_cov(i, j);
        }
      }
      op = OperatorEnsemble::from_row_covariances(theta, std::move(blocks), tag);
      break;
    }
    case OperatorStructure::independent_entries: {
      Matrix var(m, n);
      for (Index i = 0; i < m; ++i) {
        for (Index k = 0; k < n; ++k) var(i, k) = scale * (0.1 + rng.uniform());
      }
      op = OperatorEnsemble::from_entry_variances(theta, var);
      break;
    }
    default:
      throw PreconditionError("random_problem supports unstructured and independent_* tags only");
  }
  return {std::move(theta_x), std::move(c_xx), std::move(op), beta};
}

ProblemMoments scalar_instance(double theta_x) {
  Matrix var(1, 1);
  var(0, 0) = 0.25;
  return {Vector::Constant(1, theta_x), Matrix::Identity(1, 1),
          OperatorEnsemble::from_entry_variances(Matrix::Identity(1, 1), var), 0.5};
}

GaussianModelSampler::GaussianModelSampler(const ProblemMoments& pm)
    : theta_x_(pm.theta_x),
      root_xx_(psd_sqrt(pm.c_xx, "c_xx")),
      theta_a_(vec_rows(pm.op.mean_op())),
      root_aa_(psd_sqrt(pm.op.assemble_caa(), "caa")),
      noise_std_(std::sqrt(pm.beta)),
      m_(pm.m()),
      n_(pm.n()) {}

GaussianModelSampler::Draw GaussianModelSampler::draw(Rng& rng) const {
  Vector zx(n_);
  for (Index i = 0; i < n_; ++i) zx(i) = rng.normal();
  Vector za(m_ * n_);
  for (Index i = 0; i < za.size(); ++i) za(i) = rng.normal();
  Draw d;
  d.x = theta_x_ + root_xx_ * zx;
  d.a = unvec_rows(theta_a_ + root_aa_ * za, m_, n_);
  d.y = d.a * d.x;
  for (Index i = 0; i < m_; ++i) d.y(i) += noise_std_ * rng.normal();
  return d;
}

}  // namespace blmmse

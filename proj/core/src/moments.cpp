#include "blind_lmmse/moments.hpp"

#include "blind_lmmse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blmmse {

namespace {

using Index = Eigen::Index;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline Index wrap(Index a, Index n) {
  const Index r = a % n;
  return r < 0 ? r + n : r;
}

// Indices s for which row s of c is not identically zero.
std::vector<Index> support_rows(const Matrix& c) {
  std::vector<Index> out;
  for (Index s = 0; s < c.rows(); ++s) {
    if (c.row(s).cwiseAbs().maxCoeff() > 0.0) out.push_back(s);
  }
  return out;
}

Index rank_of(const Matrix& u, const Matrix& v) { return std::min(u.rows(), v.rows()); }

}  // namespace

std::string_view to_string(OperatorStructure s) {
  switch (s) {
    case OperatorStructure::unstructured: return "unstructured";
    case OperatorStructure::independent_rows: return "independent_rows";
    case OperatorStructure::independent_columns: return "independent_columns";
    case OperatorStructure::independent_entries: return "independent_entries";
    case OperatorStructure::shared_singular_vectors: return "shared_singular_vectors";
    case OperatorStructure::circulant_kernel: return "circulant_kernel";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Construction

OperatorEnsemble OperatorEnsemble::deterministic(Matrix a) {
  return OperatorEnsemble(std::move(a), Deterministic{}, OperatorStructure::independent_entries);
}

OperatorEnsemble OperatorEnsemble::from_row_covariances(Matrix mean_op, std::vector<Matrix> blocks,
                                                        OperatorStructure tag) {
  const Index m = mean_op.rows();
  const Index n = mean_op.cols();
  if (static_cast<Index>(blocks.size()) != m * m) {
    throw DimensionError("row covariance grid must hold m*m blocks");
  }
  for (const auto& b : blocks) {
    if (b.rows() != n || b.cols() != n) throw DimensionError("row covariance blocks must be n×n");
  }
  if (tag == OperatorStructure::shared_singular_vectors || tag == OperatorStructure::circulant_kernel) {
    throw DimensionError("structure tag requires a dedicated constructor");
  }
  return OperatorEnsemble(std::move(mean_op), Grid{std::move(blocks)}, tag);
}

OperatorEnsemble OperatorEnsemble::from_full_covariance(Matrix mean_op, const Matrix& caa,
                                                        OperatorStructure tag) {
  const Index m = mean_op.rows();
  const Index n = mean_op.cols();
  if (caa.rows() != m * n || caa.cols() != m * n) throw DimensionError("Caa must be mn×mn");
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(m * m));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) blocks.push_back(caa.block(i * n, j * n, n, n));
  }
  return from_row_covariances(std::move(mean_op), std::move(blocks), tag);
}

OperatorEnsemble OperatorEnsemble::from_entry_variances(Matrix mean_op, Matrix variances) {
  if (variances.rows() != mean_op.rows() || variances.cols() != mean_op.cols()) {
    throw DimensionError("entry variance table must match the operator shape");
  }
  return OperatorEnsemble(std::move(mean_op), EntryVariances{std::move(variances)},
                          OperatorStructure::independent_entries);
}

OperatorEnsemble OperatorEnsemble::from_shared_basis(Matrix u, Matrix v,
                                                     std::vector<SingularMoment> moments) {
  if (u.rows() != u.cols() || v.rows() != v.cols()) {
    throw DimensionError("shared basis matrices must be square");
  }
  const Index r = rank_of(u, v);
  if (static_cast<Index>(moments.size()) != r) {
    throw DimensionError("need min(m, n) singular-value moments");
  }
  Vector means(r);
  for (Index l = 0; l < r; ++l) means(l) = moments[static_cast<std::size_t>(l)].mean;
  Matrix mean = u.leftCols(r) * means.asDiagonal() * v.topRows(r);
  OperatorEnsemble out(std::move(mean), SharedBasis{std::move(u), std::move(v)},
                       OperatorStructure::shared_singular_vectors);
  out.singular_moments_ = std::move(moments);
  return out;
}

OperatorEnsemble OperatorEnsemble::from_kernel_covariance(Matrix mean_op, Matrix c_kk) {
  const Index n = mean_op.cols();
  if (mean_op.rows() != n) throw DimensionError("circulant ensembles are square");
  if (c_kk.rows() != n || c_kk.cols() != n) throw DimensionError("kernel covariance must be n×n");
  return OperatorEnsemble(std::move(mean_op), KernelCovariance{std::move(c_kk)},
                          OperatorStructure::circulant_kernel);
}

OperatorEnsemble OperatorEnsemble::with_singular_moments(std::vector<SingularMoment> moments) const {
  if (static_cast<Index>(moments.size()) != std::min(rows(), cols())) {
    throw DimensionError("need min(m, n) singular-value moments");
  }
  OperatorEnsemble out = *this;
  out.singular_moments_ = std::move(moments);
  return out;
}

bool OperatorEnsemble::is_deterministic() const noexcept {
  return std::holds_alternative<Deterministic>(storage_);
}

const Matrix* OperatorEnsemble::kernel_covariance() const noexcept {
  if (const auto* k = std::get_if<KernelCovariance>(&storage_)) return &k->c_kk;
  return nullptr;
}

std::optional<std::pair<Matrix, Matrix>> OperatorEnsemble::shared_basis() const {
  if (const auto* s = std::get_if<SharedBasis>(&storage_)) return std::make_pair(s->u, s->v);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Block access

Matrix OperatorEnsemble::row_cov(Index i, Index j) const {
  const Index m = rows();
  const Index n = cols();
  if (i < 0 || j < 0 || i >= m || j >= m) throw DimensionError("row index out of range");
  return std::visit(
      overloaded{
          [&](const Deterministic&) -> Matrix { return Matrix::Zero(n, n); },
          [&](const Grid& g) -> Matrix { return g.blocks[static_cast<std::size_t>(i * m + j)]; },
          [&](const EntryVariances& e) -> Matrix {
            if (i != j) return Matrix::Zero(n, n);
            return e.var.row(i).transpose().asDiagonal();
          },
          [&](const SharedBasis& s) -> Matrix {
            const Index r = rank_of(s.u, s.v);
            Vector w(r);
            for (Index l = 0; l < r; ++l) {
              w(l) = s.u(i, l) * s.u(j, l) * (*singular_moments_)[static_cast<std::size_t>(l)].variance;
            }
            const auto vr = s.v.topRows(r);
            return vr.transpose() * w.asDiagonal() * vr;
          },
          [&](const KernelCovariance& k) -> Matrix {
            Matrix out(n, n);
            for (Index a = 0; a < n; ++a) {
              for (Index b = 0; b < n; ++b) out(a, b) = k.c_kk(wrap(i - a, n), wrap(j - b, n));
            }
            return out;
          },
      },
      storage_);
}

Matrix OperatorEnsemble::assemble_caa() const {
  const Index m = rows();
  const Index n = cols();
  Matrix caa(m * n, m * n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) caa.block(i * n, j * n, n, n) = row_cov(i, j);
  }
  return caa;
}

Matrix OperatorEnsemble::contract(const Matrix& w) const {
  const Index m = rows();
  const Index n = cols();
  if (w.rows() != n || w.cols() != n) throw DimensionError("contraction weight must be n×n");
  return std::visit(
      overloaded{
          [&](const Deterministic&) -> Matrix { return Matrix::Zero(m, m); },
          [&](const Grid& g) -> Matrix {
            Matrix f(m, m);
            for (Index i = 0; i < m; ++i) {
              for (Index j = 0; j < m; ++j) {
                f(i, j) = g.blocks[static_cast<std::size_t>(i * m + j)].cwiseProduct(w).sum();
              }
            }
            return f;
          },
          [&](const EntryVariances& e) -> Matrix {
            return (e.var * w.diagonal()).asDiagonal();
          },
          [&](const SharedBasis& s) -> Matrix {
            const Index r = rank_of(s.u, s.v);
            const auto vr = s.v.topRows(r);
            const Vector proj = (vr * w * vr.transpose()).diagonal();
            Vector d(r);
            for (Index l = 0; l < r; ++l) {
              d(l) = proj(l) * (*singular_moments_)[static_cast<std::size_t>(l)].variance;
            }
            const auto ur = s.u.leftCols(r);
            return ur * d.asDiagonal() * ur.transpose();
          },
          [&](const KernelCovariance& k) -> Matrix {
            // F_ij = Σ_{s,t} c_kk(s,t) W((i-s) mod n, (j-t) mod n), restricted to
            // the kernel support.
            const auto supp = support_rows(k.c_kk);
            Matrix f = Matrix::Zero(n, n);
            Matrix g(n, n);
            for (Index s : supp) {
              g.setZero();
              for (Index t : supp) {
                const double c = k.c_kk(s, t);
                if (c == 0.0) continue;
                for (Index j = 0; j < n; ++j) g.col(j) += c * w.col(wrap(j - t, n));
              }
              for (Index i = 0; i < n; ++i) f.row(i) += g.row(wrap(i - s, n));
            }
            return f;
          },
      },
      storage_);
}

Matrix OperatorEnsemble::apply_row_cov(const Vector& v) const {
  const Index m = rows();
  const Index n = cols();
  if (v.size() != n) throw DimensionError("apply_row_cov: vector length must be n");
  return std::visit(
      overloaded{
          [&](const Deterministic&) -> Matrix { return Matrix::Zero(m * n, m); },
          [&](const Grid& g) -> Matrix {
            Matrix out(m * n, m);
            for (Index i = 0; i < m; ++i) {
              for (Index j = 0; j < m; ++j) {
                out.block(i * n, j, n, 1) = g.blocks[static_cast<std::size_t>(i * m + j)] * v;
              }
            }
            return out;
          },
          [&](const EntryVariances& e) -> Matrix {
            Matrix out = Matrix::Zero(m * n, m);
            for (Index i = 0; i < m; ++i) {
              out.block(i * n, i, n, 1) = e.var.row(i).transpose().cwiseProduct(v);
            }
            return out;
          },
          [&](const SharedBasis& s) -> Matrix {
            const Index r = rank_of(s.u, s.v);
            const auto vr = s.v.topRows(r);
            const Vector pv = vr * v;
            Matrix out(m * n, m);
            for (Index i = 0; i < m; ++i) {
              for (Index j = 0; j < m; ++j) {
                Vector w(r);
                for (Index l = 0; l < r; ++l) {
                  w(l) = s.u(i, l) * s.u(j, l) *
                         (*singular_moments_)[static_cast<std::size_t>(l)].variance * pv(l);
                }
                out.block(i * n, j, n, 1) = vr.transpose() * w;
              }
            }
            return out;
          },
          [&](const KernelCovariance& k) -> Matrix {
            // Block (i, j) entry k is H((i-k) mod n, j) with
            // H(s, j) = Σ_t c_kk(s, t) v((j-t) mod n).
            Matrix shifted(n, n);  // shifted(t, j) = v((j-t) mod n)
            for (Index t = 0; t < n; ++t) {
              for (Index j = 0; j < n; ++j) shifted(t, j) = v(wrap(j - t, n));
            }
            const Matrix h = k.c_kk * shifted;
            Matrix out(m * n, m);
            for (Index i = 0; i < m; ++i) {
              for (Index a = 0; a < n; ++a) out.row(i * n + a) = h.row(wrap(i - a, n));
            }
            return out;
          },
      },
      storage_);
}

Matrix OperatorEnsemble::expected_gram() const {
  const Index m = rows();
  const Index n = cols();
  Matrix gram = mean_.transpose() * mean_;
  std::visit(overloaded{
                 [&](const Deterministic&) {},
                 [&](const Grid& g) {
                   for (Index i = 0; i < m; ++i) gram += g.blocks[static_cast<std::size_t>(i * m + i)];
                 },
                 [&](const EntryVariances& e) { gram.diagonal() += e.var.colwise().sum().transpose(); },
                 [&](const SharedBasis&) {
                   for (Index i = 0; i < m; ++i) gram += row_cov(i, i);
                 },
                 [&](const KernelCovariance& k) {
                   // Σ_i c_kk(i-a, i-b) depends only on (a-b) mod n.
                   Vector c = Vector::Zero(n);
                   for (Index delta = 0; delta < n; ++delta) {
                     for (Index s = 0; s < n; ++s) c(delta) += k.c_kk(s, wrap(s + delta, n));
                   }
                   for (Index a = 0; a < n; ++a) {
                     for (Index b = 0; b < n; ++b) gram(a, b) += c(wrap(a - b, n));
                   }
                 },
             },
             storage_);
  return gram;
}

// ---------------------------------------------------------------------------
// Validation

void OperatorEnsemble::validate() const {
  const Index m = rows();
  const Index n = cols();
  if (!mean_.allFinite()) throw InvalidMomentsError("mean_op finite", "non-finite entries");

  std::visit(
      overloaded{
          [&](const Deterministic&) {},
          [&](const Grid& g) {
            double scale = 0.0;
            for (const auto& b : g.blocks) scale = std::max(scale, max_abs(b));
            scale = std::max(scale, 1e-300);
            for (Index i = 0; i < m; ++i) {
              for (Index j = 0; j < m; ++j) {
                const Matrix& cij = g.blocks[static_cast<std::size_t>(i * m + j)];
                const Matrix& cji = g.blocks[static_cast<std::size_t>(j * m + i)];
                if ((cij - cji.transpose()).cwiseAbs().maxCoeff() > kSymmetryRelTol * scale) {
                  throw InvalidMomentsError(
                      "row_cov_symmetry",
                      "C_{A_i A_j} != C_{A_j A_i}^T at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
                }
                const bool off_diag_block = i != j;
                if (tag_ == OperatorStructure::independent_rows && off_diag_block &&
                    cij.cwiseAbs().maxCoeff() > kSymmetryRelTol * scale) {
                  throw InvalidMomentsError("structure_independent_rows",
                                            "nonzero cross-covariance between distinct rows");
                }
                if ((tag_ == OperatorStructure::independent_columns ||
                     tag_ == OperatorStructure::independent_entries) &&
                    (cij - Matrix(cij.diagonal().asDiagonal())).cwiseAbs().maxCoeff() >
                        kSymmetryRelTol * scale) {
                  throw InvalidMomentsError(tag_ == OperatorStructure::independent_columns
                                                ? "structure_independent_columns"
                                                : "structure_independent_entries",
                                            "row cross-covariance blocks must be diagonal");
                }
                if (tag_ == OperatorStructure::independent_entries && off_diag_block &&
                    cij.cwiseAbs().maxCoeff() > kSymmetryRelTol * scale) {
                  throw InvalidMomentsError("structure_independent_entries",
                                            "nonzero covariance between entries of distinct rows");
                }
              }
            }
            require_symmetric_psd(assemble_caa(), "caa", kSymmetryRelTol, kPsdRelTol);
          },
          [&](const EntryVariances& e) {
            if (e.var.minCoeff() < 0.0) {
              throw InvalidMomentsError("entry_variance_nonnegative", "negative entry variance");
            }
          },
          [&](const SharedBasis& s) {
            const Index r = rank_of(s.u, s.v);
            if ((s.u.transpose() * s.u - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10 ||
                (s.v.transpose() * s.v - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
              throw InvalidMomentsError("shared_basis_orthonormal", "U or V is not orthonormal");
            }
            for (Index l = 0; l < r; ++l) {
              const auto& sm = (*singular_moments_)[static_cast<std::size_t>(l)];
              if (!(sm.mean > 0.0)) {
                throw InvalidMomentsError("singular_mean_positive",
                                          "E[s_" + std::to_string(l) + "] must be positive");
              }
              if (sm.variance < -1e-12 * sm.second_moment()) {
                throw InvalidMomentsError("singular_second_moment",
                                          "E[s^2] < E[s]^2 at index " + std::to_string(l));
              }
            }
          },
          [&](const KernelCovariance& k) {
            if (!is_symmetric(k.c_kk, kSymmetryRelTol)) {
              throw InvalidMomentsError("row_cov_symmetry",
                                        "kernel covariance is asymmetric, so C_{A_i A_j} != C_{A_j A_i}^T");
            }
            require_symmetric_psd(k.c_kk, "caa", kSymmetryRelTol, kPsdRelTol);
          },
      },
      storage_);
}

// ---------------------------------------------------------------------------
// ProblemMoments

void ProblemMoments::check_dimensions() const {
  if (c_xx.rows() != n() || c_xx.cols() != n()) throw DimensionError("c_xx must be n×n with n = len(theta_x)");
  if (op.cols() != n()) throw DimensionError("operator column count must equal signal dimension");
}

void ProblemMoments::validate() const {
  check_dimensions();
  if (!(beta >= 0.0)) throw InvalidMomentsError("beta_nonnegative", "noise level must be >= 0");
  if (!theta_x.allFinite() || !c_xx.allFinite()) {
    throw InvalidMomentsError("c_xx finite", "non-finite signal moments");
  }
  if (!is_symmetric(c_xx, kSymmetryRelTol)) {
    throw InvalidMomentsError("c_xx_symmetric", "signal covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(c_xx, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-10 * top) {
    throw InvalidMomentsError("c_xx_psd", "signal covariance has a negative eigenvalue");
  }
  op.validate();
}

// ---------------------------------------------------------------------------
// Analytic moments

Matrix cross_cov_signal_obs(const ProblemMoments& pm) {
  pm.check_dimensions();
  return pm.c_xx * pm.op.mean_op().transpose();
}

Vector obs_mean(const ProblemMoments& pm) {
  pm.check_dimensions();
  return pm.op.mean_op() * pm.theta_x;
}

Vector operator_mean_vec(const ProblemMoments& pm) { return vec_rows(pm.op.mean_op()); }

Matrix interaction_matrix(const ProblemMoments& pm) {
  pm.check_dimensions();
  const Index m = pm.m();
  const Index n = pm.n();
  const auto& op = pm.op;
  const bool grid_backed = op.kernel_covariance() == nullptr && !op.shared_basis() && !op.is_deterministic();
  switch (op.structure()) {
    case OperatorStructure::independent_rows:
      if (grid_backed) {
        Matrix d = Matrix::Zero(m, m);
        for (Index i = 0; i < m; ++i) d(i, i) = op.row_cov(i, i).cwiseProduct(pm.c_xx).sum();
        return d;
      }
      break;
    case OperatorStructure::independent_columns:
      if (grid_backed) {
        // Diagonal blocks: only Var(x_k) enters.
        Matrix d(m, m);
        const Vector var_x = pm.c_xx.diagonal();
        for (Index i = 0; i < m; ++i) {
          for (Index j = 0; j < m; ++j) d(i, j) = op.row_cov(i, j).diagonal().dot(var_x);
        }
        return d;
      }
      break;
    case OperatorStructure::independent_entries: {
      // D = diag(Var(A) Var(x)).
      Matrix var_a(m, n);
      for (Index i = 0; i < m; ++i) var_a.row(i) = op.row_cov(i, i).diagonal().transpose();
      return (var_a * pm.c_xx.diagonal()).asDiagonal();
    }
    default:
      break;
  }
  return op.contract(pm.c_xx);
}

Matrix interaction_matrix_general(const ProblemMoments& pm) {
  pm.check_dimensions();
  const Index m = pm.m();
  const Index n = pm.n();
  Matrix d(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      const Matrix c = pm.op.row_cov(i, j);
      double acc = 0.0;
      for (Index k = 0; k < n; ++k) {
        for (Index q = 0; q < n; ++q) acc += c(k, q) * pm.c_xx(k, q);
      }
      d(i, j) = acc;
    }
  }
  return d;
}

BlindObsCov cov_obs_blind(const ProblemMoments& pm) {
  pm.check_dimensions();
  const Index m = pm.m();
  const Matrix& theta = pm.op.mean_op();
  BlindObsCov out;
  out.mean_term = theta * pm.c_xx * theta.transpose();
  out.kron_term = pm.op.contract(pm.theta_x * pm.theta_x.transpose());
  out.d_term = interaction_matrix(pm);
  out.noise_term = pm.beta * Matrix::Identity(m, m);
  out.total = out.mean_term + out.kron_term + out.d_term + out.noise_term;
  require_symmetric_psd(out.total, "c_yy", kPsdRelTol, kPsdRelTol);
  return out;
}

Matrix cov_op_obs(const ProblemMoments& pm) {
  pm.check_dimensions();
  return pm.op.apply_row_cov(pm.theta_x);
}

}  // namespace blmmse

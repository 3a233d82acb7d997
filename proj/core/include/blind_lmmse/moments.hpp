#pragma once

// Second-order model of the blind observation y = A x + e.
//
// Vectorization is row-major throughout: a = vec(A) concatenates the rows of
// A, so entry (i, k) of A sits at index i*n + k and the observation can be
// written y = (I_m ⊗ xᵀ) a + e.

#include "blind_lmmse/linalg.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace blmmse {

enum class OperatorStructure {
  unstructured,
  independent_rows,
  independent_columns,
  independent_entries,
  shared_singular_vectors,
  circulant_kernel,
};

std::string_view to_string(OperatorStructure s);

/// First and second moment of one singular value of the random operator.
struct SingularMoment {
  double mean = 0.0;
  double variance = 0.0;

  double second_moment() const noexcept { return variance + mean * mean; }
  /// Squared coefficient of variation Var/E².
  double cv2() const noexcept { return variance / (mean * mean); }

  static SingularMoment from_raw(double mean, double second_moment) noexcept {
    return {mean, second_moment - mean * mean};
  }
};

/// Distribution over m×n forward matrices, described by its mean and the
/// cross-covariances C_{A_i A_j} between rows i and j.
///
/// The full mn×mn covariance of vec(A) is never stored; each representation
/// produces row blocks and Frobenius contractions on demand.
class OperatorEnsemble {
 public:
  /// Degenerate ensemble: A is fixed.
  static OperatorEnsemble deterministic(Matrix a);

  /// Explicit m×m grid of n×n blocks; block (i, j) at index i*m + j.
  static OperatorEnsemble from_row_covariances(Matrix mean_op, std::vector<Matrix> blocks,
                                               OperatorStructure tag = OperatorStructure::unstructured);

  /// Splits a full mn×mn covariance of vec(A) into row blocks.
  static OperatorEnsemble from_full_covariance(Matrix mean_op, const Matrix& caa,
                                               OperatorStructure tag = OperatorStructure::unstructured);

  /// Independent entries with the given m×n variance table.
  static OperatorEnsemble from_entry_variances(Matrix mean_op, Matrix variances);

  /// A = U_r diag(s) V_r with fixed orthonormal U (m×m), V (n×n) and mutually
  /// independent singular values s_l, r = min(m, n). V_r holds the first r
  /// rows of V, U_r the first r columns of U.
  static OperatorEnsemble from_shared_basis(Matrix u, Matrix v, std::vector<SingularMoment> moments);

  /// Periodic convolution A = T(k) with Cov(k) = c_kk, i.e.
  /// Cov(A_ik, A_jq) = c_kk((i-k) mod n, (j-q) mod n).
  static OperatorEnsemble from_kernel_covariance(Matrix mean_op, Matrix c_kk);

  Eigen::Index rows() const noexcept { return mean_.rows(); }
  Eigen::Index cols() const noexcept { return mean_.cols(); }
  const Matrix& mean_op() const noexcept { return mean_; }
  OperatorStructure structure() const noexcept { return tag_; }
  bool is_deterministic() const noexcept;

  /// C_{A_i A_j}, n×n.
  Matrix row_cov(Eigen::Index i, Eigen::Index j) const;

  /// Caa, the mn×mn covariance of vec(A).
  Matrix assemble_caa() const;

  /// m×m matrix F with F_ij = Σ_kq (C_{A_i A_j} ⊙ W)_kq.
  Matrix contract(const Matrix& w) const;

  /// Caa·(I_m ⊗ vᵀ)ᵀ, an mn×m matrix whose (i, j) block is C_{A_i A_j} v.
  Matrix apply_row_cov(const Vector& v) const;

  /// E[AᵀA] = ΘᵀΘ + Σ_i C_{A_i A_i}.
  Matrix expected_gram() const;

  /// Per-index singular-value moments, when the ensemble has shared singular
  /// structure (set at construction or attached after a Monte-Carlo pass).
  const std::optional<std::vector<SingularMoment>>& singular_moments() const noexcept {
    return singular_moments_;
  }
  OperatorEnsemble with_singular_moments(std::vector<SingularMoment> moments) const;

  /// Kernel covariance for circulant ensembles, shared basis (U, V) for
  /// shared-singular-vector ensembles.
  const Matrix* kernel_covariance() const noexcept;
  std::optional<std::pair<Matrix, Matrix>> shared_basis() const;

  /// Checks every representation invariant; throws InvalidMomentsError
  /// naming the first one that fails.
  void validate() const;

 private:
  struct Deterministic {};
  struct Grid {
    std::vector<Matrix> blocks;
  };
  struct EntryVariances {
    Matrix var;
  };
  struct SharedBasis {
    Matrix u;
    Matrix v;
  };
  struct KernelCovariance {
    Matrix c_kk;
  };
  using Storage = std::variant<Deterministic, Grid, EntryVariances, SharedBasis, KernelCovariance>;

  OperatorEnsemble(Matrix mean, Storage storage, OperatorStructure tag)
      : mean_(std::move(mean)), storage_(std::move(storage)), tag_(tag) {}

  Matrix mean_;
  Storage storage_;
  OperatorStructure tag_;
  std::optional<std::vector<SingularMoment>> singular_moments_;
};

/// First and second moments of the signal, operator and noise (Cε = βI).
struct ProblemMoments {
  Vector theta_x;
  Matrix c_xx;
  OperatorEnsemble op;
  double beta = 0.0;

  Eigen::Index n() const noexcept { return theta_x.size(); }
  Eigen::Index m() const noexcept { return op.rows(); }

  /// Shape checks only; cheap enough to run on every call.
  void check_dimensions() const;
  /// Full invariant check, including the operator ensemble.
  void validate() const;
};

/// The four additive pieces of the blind observation covariance.
struct BlindObsCov {
  Matrix mean_term;  ///< Θ Cxx Θᵀ
  Matrix kron_term;  ///< (I⊗θxᵀ) Caa (I⊗θxᵀ)ᵀ
  Matrix d_term;     ///< interaction matrix D
  Matrix noise_term; ///< β I
  Matrix total;      ///< Cyy
};

/// Cxy = Cxx Θᵀ.
Matrix cross_cov_signal_obs(const ProblemMoments& pm);

/// θy = Θ θx.
Vector obs_mean(const ProblemMoments& pm);

/// θa = vec(Θ).
Vector operator_mean_vec(const ProblemMoments& pm);

/// D with D_ij = Σ_kq (C_{A_i A_j} ⊙ Cxx)_kq, specialised on the structure tag.
Matrix interaction_matrix(const ProblemMoments& pm);

/// The same double sum evaluated block by block, ignoring the structure tag.
Matrix interaction_matrix_general(const ProblemMoments& pm);

BlindObsCov cov_obs_blind(const ProblemMoments& pm);

/// Cay = Caa (I_m ⊗ θxᵀ)ᵀ, mn×m.
Matrix cov_op_obs(const ProblemMoments& pm);

}  // namespace blmmse

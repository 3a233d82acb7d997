#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace blmmse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance for PSD checks on assembled covariances.
inline constexpr double kPsdRelTol = 1e-8;
/// Relative tolerance for symmetry checks on input covariances.
inline constexpr double kSymmetryRelTol = 1e-10;
/// Condition number above which an unregularized solve is refused.
inline constexpr double kMaxCondition = 1e14;

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Largest absolute entry, used as the scale for relative tolerances.
double max_abs(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryRelTol);

/// Throws InvalidMomentsError(name) unless m is square, symmetric and PSD
/// within the given relative tolerances.
void require_symmetric_psd(const Matrix& m, std::string_view name,
                           double sym_rel_tol = kSymmetryRelTol,
                           double psd_rel_tol = kPsdRelTol);

/// Symmetric square root S with S*S = m, for PSD m (tiny negatives clamped).
Matrix psd_sqrt(const Matrix& m, std::string_view name);

/// Kronecker product (I_m ⊗ vᵀ), an m × (m·len(v)) selector for row-major vec.
Matrix identity_kron_row(Eigen::Index m, const Vector& v);

/// Row-major vectorization: concatenation of the rows of m.
Vector vec_rows(const Matrix& m);

/// Inverse of vec_rows.
Matrix unvec_rows(const Vector& v, Eigen::Index rows, Eigen::Index cols);

}  // namespace blmmse

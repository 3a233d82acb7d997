#include "blind_lmmse/linalg.hpp"

#include "blind_lmmse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blmmse {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == m.cols() && m.isApprox(m.transpose(), 0.0)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(max_abs(m), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_symmetric_psd(const Matrix& m, std::string_view name, double sym_rel_tol,
                           double psd_rel_tol) {
  const std::string label(name);
  if (m.rows() != m.cols()) {
    throw DimensionError(label + " must be square");
  }
  if (m.size() == 0) return;
  if (!is_symmetric(m, sym_rel_tol)) {
    throw InvalidMomentsError(label + " symmetric",
                              "asymmetry exceeds relative tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  const double low = es.eigenvalues().minCoeff();
  if (low < -psd_rel_tol * top) {
    throw InvalidMomentsError(label + " PSD",
                              "smallest eigenvalue " + std::to_string(low) +
                                  " below tolerance for norm " + std::to_string(top));
  }
}

Matrix psd_sqrt(const Matrix& m, std::string_view name) {
  if (m.size() == 0) return m;
  if (m.isDiagonal(0.0)) {
    Vector d = m.diagonal();
    const double top = d.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d(i) < -1e-10 * top) {
        throw InvalidMomentsError(std::string(name) + " PSD", "negative variance on diagonal");
      }
      d(i) = std::sqrt(std::max(d(i), 0.0));
    }
    return d.asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  Vector ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10 * top) {
      throw InvalidMomentsError(std::string(name) + " PSD",
                                "eigenvalue " + std::to_string(ev(i)) + " is negative");
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix identity_kron_row(Eigen::Index m, const Vector& v) {
  const Eigen::Index n = v.size();
  Matrix g = Matrix::Zero(m, m * n);
  for (Eigen::Index i = 0; i < m; ++i) g.block(i, i * n, 1, n) = v.transpose();
  return g;
}

Vector vec_rows(const Matrix& m) {
  Vector out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
  }
  return out;
}

Matrix unvec_rows(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec_rows: length mismatch");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) out.row(i) = v.segment(i * cols, cols).transpose();
  return out;
}

}  // namespace blmmse

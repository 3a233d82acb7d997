#include "blind_lmmse/convolution.hpp"

#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/parallel.hpp"

#include <cmath>
#include <numbers>

namespace blmmse {

namespace {

using Index = Eigen::Index;

inline Index wrap(Index a, Index n) {
  const Index r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

void KernelStats::validate() const {
  if (c_kk.rows() != n() || c_kk.cols() != n()) throw DimensionError("c_kk must be n×n");
  require_symmetric_psd(c_kk, "c_kk", kSymmetryRelTol, kPsdRelTol);
}

ShiftBasis::ShiftBasis(Index n) : n_(n) {
  if (n < 1) throw DimensionError("shift basis size must be positive");
}

Matrix ShiftBasis::matrix(Index s) const { return shift_matrix(n_, s); }

Index ShiftBasis::product_index(Index s, Index t) const noexcept { return wrap(s + t, n_); }

Matrix shift_matrix(Index n, Index s) {
  if (n < 1) throw DimensionError("shift matrix size must be positive");
  Matrix b = Matrix::Zero(n, n);
  for (Index q = 0; q < n; ++q) b(wrap(q + s, n), q) = 1.0;
  return b;
}

Matrix conv_matrix_from_kernel(const Vector& k) {
  const Index n = k.size();
  if (n < 1) throw DimensionError("kernel must be non-empty");
  Matrix t(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index q = 0; q < n; ++q) t(r, q) = k(wrap(r - q, n));
  }
  return t;
}

Matrix vec_lift_matrix(Index n) {
  if (n < 1) throw DimensionError("vec lift size must be positive");
  Matrix p = Matrix::Zero(n * n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index q = 0; q < n; ++q) p(r * n + q, wrap(r - q, n)) = 1.0;
  }
  return p;
}

Vector circular_convolve(const Vector& k, const Vector& x) {
  const Index n = k.size();
  if (x.size() != n) throw DimensionError("circular_convolve: kernel and signal lengths differ");
  Vector y = Vector::Zero(n);
  for (Index s = 0; s < n; ++s) {
    const double ks = k(s);
    if (ks == 0.0) continue;
    for (Index t = 0; t < n; ++t) y(t) += ks * x(wrap(t - s, n));
  }
  return y;
}

Matrix operator_mean_from_kernel(const KernelStats& ks) { return conv_matrix_from_kernel(ks.theta_k); }

OperatorEnsemble operator_cov_from_kernel(const KernelStats& ks) {
  if (ks.c_kk.rows() != ks.n() || ks.c_kk.cols() != ks.n()) throw DimensionError("c_kk must be n×n");
  return OperatorEnsemble::from_kernel_covariance(operator_mean_from_kernel(ks), ks.c_kk);
}

std::vector<Index> circulant_frequency_order(Index n) {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  order.push_back(0);
  for (Index f = 1; static_cast<Index>(order.size()) < n; ++f) {
    order.push_back(f);
    if (static_cast<Index>(order.size()) < n && n - f != f) order.push_back(n - f);
  }
  return order;
}

namespace {

struct Twiddles {
  explicit Twiddles(Index n) : n(n), cos_t(n), sin_t(n) {
    for (Index j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      cos_t(j) = std::cos(angle);
      sin_t(j) = std::sin(angle);
    }
  }
  Index n;
  Vector cos_t;
  Vector sin_t;
};

Vector singular_values_with(const Vector& k, const Twiddles& tw, const std::vector<Index>& order) {
  const Index n = k.size();
  Vector out(n);
  for (Index pos = 0; pos < n; ++pos) {
    const Index f = order[static_cast<std::size_t>(pos)];
    double re = 0.0;
    double im = 0.0;
    for (Index s = 0; s < n; ++s) {
      const Index j = (f * s) % n;
      re += k(s) * tw.cos_t(j);
      im -= k(s) * tw.sin_t(j);
    }
    out(pos) = std::hypot(re, im);
  }
  return out;
}

}  // namespace

Vector circulant_singular_values(const Vector& k) {
  if (k.size() < 1) throw DimensionError("kernel must be non-empty");
  return singular_values_with(k, Twiddles(k.size()), circulant_frequency_order(k.size()));
}

std::vector<SingularMoment> singular_moments_circulant(const KernelSampler& sampler, Index n,
                                                       std::size_t n_draws, std::uint64_t seed) {
  if (n_draws < 2) throw PreconditionError("singular_moments_circulant needs at least 2 draws");
  if (n < 1) throw DimensionError("kernel length must be positive");
  const Twiddles tw(n);
  const auto order = circulant_frequency_order(n);
  Matrix values(n, static_cast<Index>(n_draws));
  parallel_for(n_draws, [&](std::size_t j) {
    Rng rng = Rng::substream(seed, j, StreamTag::kernel);
    const Vector k = sampler(rng);
    if (k.size() != n) throw DimensionError("sampled kernel has the wrong length");
    if (k.cwiseAbs().maxCoeff() == 0.0) {
      throw PreconditionError("degenerate kernel draw (all zeros) at index " + std::to_string(j));
    }
    values.col(static_cast<Index>(j)) = singular_values_with(k, tw, order);
  });

  // Sums are shifted by the first draw so a deterministic kernel yields an
  // exactly zero variance.
  const double count = static_cast<double>(n_draws);
  std::vector<SingularMoment> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double shift = values(i, 0);
    double s1 = 0.0;
    double s2 = 0.0;
    for (Index j = 0; j < values.cols(); ++j) {
      const double d = values(i, j) - shift;
      s1 += d;
      s2 += d * d;
    }
    const double mean_d = s1 / count;
    out[static_cast<std::size_t>(i)] = {shift + mean_d, std::max(0.0, s2 / count - mean_d * mean_d)};
  }
  return out;
}

std::vector<SingularMoment> singular_moments_circulant(const KernelStats& ks, std::size_t n_draws,
                                                       std::uint64_t seed) {
  ks.validate();
  const Matrix root = psd_sqrt(ks.c_kk, "c_kk");
  const Index n = ks.n();
  return singular_moments_circulant(
      [&](Rng& rng) {
        Vector z(n);
        for (Index i = 0; i < n; ++i) z(i) = rng.normal();
        return Vector(ks.theta_k + root * z);
      },
      n, n_draws, seed);
}

}  // namespace blmmse

#pragma once

// Random and reference problem instances used by the verifier and tests.

#include "blind_lmmse/moments.hpp"
#include "blind_lmmse/rng.hpp"

namespace blmmse {

/// Random symmetric positive definite matrix B Bᵀ/k + floor·I.
Matrix random_spd(Eigen::Index k, Rng& rng, double floor = 0.1);

/// Random problem with Gaussian-style moments. The operator covariance
/// follows `tag`; for `unstructured` it is a full positive definite Caa.
ProblemMoments random_problem(Eigen::Index n, Eigen::Index m, OperatorStructure tag, Rng& rng);

/// Scalar instance: θx = theta_x, Cxx = 1, Θ = 1, Var(a) = 0.25, β = 0.5.
ProblemMoments scalar_instance(double theta_x = 0.0);

/// Draws (x, A, y) from the Gaussian model with the moments of pm. Needs
/// pm.op backed by an explicit covariance (assembled on construction).
class GaussianModelSampler {
 public:
  explicit GaussianModelSampler(const ProblemMoments& pm);

  struct Draw {
    Vector x;
    Matrix a;
    Vector y;
  };
  Draw draw(Rng& rng) const;

 private:
  Vector theta_x_;
  Matrix root_xx_;
  Vector theta_a_;
  Matrix root_aa_;
  double noise_std_;
  Eigen::Index m_;
  Eigen::Index n_;
};

}  // namespace blmmse

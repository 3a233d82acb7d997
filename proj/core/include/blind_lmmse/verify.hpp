#pragma once

// Self-checks behind `blind-lmmse verify`: cross-route equivalences, the
// Monte-Carlo covariance oracle, operator-norm bounds and the preconditions
// of the sampling bounds. Each check is also usable on its own.

#include "blind_lmmse/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace blmmse {

struct VerifyCheck {
  std::string name;
  bool pass = true;
  std::string detail;
  /// Informational lines are printed as NOTE and never fail the report.
  bool informational = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool all_pass() const noexcept;
  /// One "PASS name: detail" / "FAIL ..." / "NOTE ..." line per check.
  std::string to_string() const;
};

/// Random problem dimensions are drawn from [1, max_dim]; the operator
/// structure cycles through unstructured and the independent_* tags.
VerifyCheck check_tikhonov_signal(std::size_t instances, Eigen::Index max_dim, std::uint64_t seed);
VerifyCheck check_tikhonov_operator(std::size_t instances, Eigen::Index max_dim, std::uint64_t seed);
VerifyCheck check_joint_decoupling(std::size_t instances, Eigen::Index max_dim, std::uint64_t seed);
VerifyCheck check_nonblind_reduction(std::size_t instances, Eigen::Index max_dim, std::uint64_t seed);
VerifyCheck check_d_special_cases(std::size_t instances, Eigen::Index max_dim, std::uint64_t seed);

/// Entrywise comparison of the Monte-Carlo Cov(y) with cov_obs_blind, each
/// entry within `n_se` standard errors of the per-draw product mean.
VerifyCheck check_mc_covariance(std::size_t instances, Eigen::Index max_dim, Eigen::Index draws, std::uint64_t seed,
                                double n_se = 3.0);

/// ‖L^λ‖ ≤ lmmse_norm_bound(α, β, λ) with no tolerance, over every (α, β+λ)
/// pair, on a shared-singular-vector instance and on the scalar instance.
VerifyCheck check_gain_norm_bound(const std::vector<double>& alphas, const std::vector<double>& levels, std::uint64_t seed);

VerifyReport run_verify(const ExperimentSettings& s);

/// Runs the suite and writes verify.txt into out.
VerifyReport cmd_verify(const ExperimentSettings& s, const std::filesystem::path& out);

}  // namespace blmmse

#pragma once

// Reproduction drivers: reconstruction demo, source-condition sweep, kernel
// variability sweep, sample-size convergence study, bound report, dataset
// export. Every driver writes CSVs into an output directory along with the
// effective configuration (run_config.txt) needed to rerun it.

#include "blind_lmmse/bounds.hpp"
#include "blind_lmmse/config.hpp"
#include "blind_lmmse/datagen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace blmmse {

struct RegimeConfig {
  std::string label;
  double sigma_n = 0.5;
  double sigma_theta = 0.4;
};

/// Defaults for the three convergence regimes: R1 (0.5, 0.4), R2 (1.5, 0.4),
/// R3 (0.5, 1.2) as (σn, σθ).
std::vector<RegimeConfig> default_regimes();

struct ExperimentSettings {
  std::uint64_t seed = 20240917;
  Eigen::Index n = 128;
  Eigen::Index n_train = 1000;
  Eigen::Index n_test = 20;
  double amplitude = 2.0;
  Eigen::Index d = 21;
  double spread = 0.5;
  double spread_std = 0.0;
  double sigma_theta = 0.4;
  double sigma_n = 0.5;
  /// Source-condition exponent for demo, bounds and datagen; none = sinusoid prior.
  std::optional<double> alpha;
  /// Regularization; none selects each command's default.
  std::optional<double> lambda;
  Eigen::Index replicates = 20;
  std::vector<double> alpha_grid{0.5, 1.0, 1.3, 1.5, 1.8, 2.0};
  std::vector<Eigen::Index> n_grid{500, 1000, 1500, 2000, 2500, 3000, 3500, 4000};
  std::vector<double> sigma_std_grid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  double alpha_cv = 1.2;
  /// Shift variability used by the width sweep (0 isolates the width channel).
  double cv_sigma_theta = 0.0;
  Eigen::Index moment_draws = 10000;
  std::vector<RegimeConfig> regimes = default_regimes();
  Eigen::Index mc_draws = 100000;
  Eigen::Index verify_instances = 20;
  bool inject_caa_asymmetry = false;

  /// Every key accepted in a config file (manifest keys included).
  static const std::set<std::string>& known_keys();
  /// Rejects unknown keys and malformed values.
  static ExperimentSettings from_config(const Config& cfg);

  ShiftedKernelEnsemble ensemble() const { return {n, d, spread, sigma_theta, spread_std}; }
  DatasetManifest manifest() const;
  /// Full `key = value` listing that reproduces these settings.
  std::string to_config_text() const;
  void validate() const;
};

/// One cell of a sweep.
struct SweepResult {
  std::string sweep_id;
  std::string parameter;
  double value = 0.0;
  double lhs_mean = 0.0;
  double lhs_std = 0.0;
  double rhs_total = 0.0;
  double term_noise = 0.0;
  double term_operator = 0.0;
  double cv2 = 0.0;
  Eigen::Index n_test = 0;
  std::uint64_t seed = 0;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(err) on log(N); needs ≥ 3 points, all positive.
LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

struct DemoResult {
  double mse_estimate = 0.0;  ///< ‖x̂ − x‖²/n
  double mse_mean = 0.0;      ///< ‖θx − x‖²/n
};

/// Exact-moment blind estimator applied to one held-out observation; writes
/// demo.csv (i, x_true, x_mean, y, x_hat). The test draw uses `test_seed`
/// when given, else a seed derived from settings.seed.
DemoResult cmd_demo(const ExperimentSettings& s, const std::filesystem::path& out, bool plot,
                    std::optional<std::uint64_t> test_seed = std::nullopt);

/// Source-condition sweep; writes sweep_alpha.csv.
std::vector<SweepResult> cmd_sweep_alpha(const ExperimentSettings& s, const std::filesystem::path& out, bool plot);

/// Kernel-width variability sweep at α = alpha_cv; writes sweep_cv.csv.
std::vector<SweepResult> cmd_sweep_cv(const ExperimentSettings& s, const std::filesystem::path& out, bool plot);

struct SweepNRow {
  std::string regime;
  Eigen::Index n_train = 0;
  Eigen::Index replicate = 0;
  double err = 0.0;
};

struct SweepNSummary {
  std::string regime;
  Eigen::Index n_train = 0;
  double err_mean = 0.0;
  double err_std = 0.0;
  double test_spread = 0.0;
  double lambda = 0.0;
  LogLogFit fit;
};

struct SweepNResult {
  std::vector<SweepNRow> rows;
  std::vector<SweepNSummary> summary;
};

/// Convergence of the empirical estimator to the exact one; writes
/// sweep_n.csv and sweep_n_summary.csv.
SweepNResult cmd_sweep_n(const ExperimentSettings& s, const std::filesystem::path& out, bool plot);

/// Evaluates every bound for the configured model; writes bounds.csv.
std::vector<std::pair<std::string, std::string>> cmd_bounds(const ExperimentSettings& s,
                                                            const std::filesystem::path& out);

/// Writes manifest.txt, x.csv and y.csv for the configured dataset.
Dataset cmd_datagen(const ExperimentSettings& s, const std::filesystem::path& out);

/// Kernel sampler for the Monte-Carlo singular-value moments of an ensemble.
KernelSampler ensemble_sampler(const ShiftedKernelEnsemble& ens);

}  // namespace blmmse

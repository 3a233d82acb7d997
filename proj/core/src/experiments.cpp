#include "blind_lmmse/experiments.hpp"

#include "blind_lmmse/csv.hpp"
#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/estimators.hpp"
#include "blind_lmmse/parallel.hpp"
#include "blind_lmmse/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blmmse {

namespace {

using Index = Eigen::Index;
namespace fs = std::filesystem;

// Seed-derivation tags; one per independent random component of a run.
enum SeedTag : std::uint64_t {
  kDemoTest = 1,
  kAlphaMoments = 10,
  kAlphaTrain = 11,
  kAlphaTest = 12,
  kCvMoments = 20,
  kCvTrain = 21,
  kCvTest = 22,
  kNTrain = 30,
  kNTest = 31,
  kBoundsMoments = 40,
  kBoundsPilot = 41,
};

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

void prepare_out(const ExperimentSettings& s, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw std::runtime_error("cannot create output directory " + out.string());
  write_text_file(out / "run_config.txt", s.to_config_text());
}

std::vector<double> squared_errors(const Matrix& truth, const Matrix& estimate) {
  std::vector<double> out(static_cast<std::size_t>(truth.cols()));
  for (Index k = 0; k < truth.cols(); ++k) out[static_cast<std::size_t>(k)] = (truth.col(k) - estimate.col(k)).squaredNorm();
  return out;
}

struct CellOutcome {
  double lhs_mean;
  double lhs_std;
  BoundReport rhs;
};

// Empirical estimator on a fresh training set, scored on fresh test signals,
// against the statement-form approximation bound.
CellOutcome evaluate_cell(const GaussianPrior& prior, const ShiftedKernelEnsemble& ens, double sigma_n,
                          const std::vector<SingularMoment>& moments, double alpha, double lambda,
                          const ExperimentSettings& s, std::uint64_t train_seed, std::uint64_t test_seed) {
  const SampleSet train = generate_samples(prior, ens, sigma_n, s.n_train, train_seed);
  const SampleSet test = generate_samples(prior, ens, sigma_n, s.n_test, test_seed);
  const AffineEstimator est = empirical_lmmse(train, lambda);
  const auto errs = squared_errors(test.xs, est.apply_columns(test.ys));
  return {mean_of(errs), std_of(errs),
          approx_bound_rhs(moments, ens.n, sigma_n * sigma_n, alpha, lambda, ApproxConstants::statement)};
}

}  // namespace

std::vector<RegimeConfig> default_regimes() { return {{"R1", 0.5, 0.4}, {"R2", 1.5, 0.4}, {"R3", 0.5, 1.2}}; }

const std::set<std::string>& ExperimentSettings::known_keys() {
  static const std::set<std::string> keys = {
      "seed", "n", "n_train", "n_test", "amplitude", "d", "spread", "spread_std", "sigma_theta", "sigma_n",
      "alpha", "generator_version", "lambda", "replicates", "alpha_grid", "n_grid", "sigma_std_grid", "alpha_cv",
      "cv_sigma_theta", "moment_draws", "regimes", "r1_sigma_n", "r1_sigma_theta", "r2_sigma_n", "r2_sigma_theta",
      "r3_sigma_n", "r3_sigma_theta", "mc_draws", "verify_instances", "inject_caa_asymmetry"};
  return keys;
}

ExperimentSettings ExperimentSettings::from_config(const Config& cfg) {
  cfg.require_known(known_keys());
  ExperimentSettings s;
  if (cfg.has("seed")) {
    const std::string v = cfg.text("seed", "");
    std::size_t used = 0;
    try {
      s.seed = std::stoull(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-') throw std::invalid_argument("config key 'seed': not an unsigned integer: " + v);
  }
  s.n = cfg.integer("n", s.n);
  s.n_train = cfg.integer("n_train", s.n_train);
  s.n_test = cfg.integer("n_test", s.n_test);
  s.amplitude = cfg.number("amplitude", s.amplitude);
  s.d = cfg.integer("d", s.d);
  s.spread = cfg.number("spread", s.spread);
  s.spread_std = cfg.number("spread_std", s.spread_std);
  s.sigma_theta = cfg.number("sigma_theta", s.sigma_theta);
  s.sigma_n = cfg.number("sigma_n", s.sigma_n);
  if (cfg.has("alpha") && cfg.text("alpha", "") != "none") s.alpha = cfg.number("alpha", 1.0);
  if (cfg.has("lambda") && cfg.text("lambda", "") != "auto") s.lambda = cfg.number("lambda", 0.0);
  if (cfg.has("generator_version") && cfg.text("generator_version", "") != kGeneratorVersion) {
    throw std::invalid_argument("config generator_version does not match this build (" + std::string(kGeneratorVersion) + ")");
  }
  s.replicates = cfg.integer("replicates", s.replicates);
  s.alpha_grid = cfg.numbers("alpha_grid", s.alpha_grid);
  if (cfg.has("n_grid")) {
    s.n_grid.clear();
    for (double v : cfg.numbers("n_grid", {})) {
      if (v != std::floor(v)) throw std::invalid_argument("config key 'n_grid': sample sizes must be integers");
      s.n_grid.push_back(static_cast<Index>(v));
    }
  }
  s.sigma_std_grid = cfg.numbers("sigma_std_grid", s.sigma_std_grid);
  s.alpha_cv = cfg.number("alpha_cv", s.alpha_cv);
  s.cv_sigma_theta = cfg.number("cv_sigma_theta", s.cv_sigma_theta);
  s.moment_draws = cfg.integer("moment_draws", s.moment_draws);
  s.mc_draws = cfg.integer("mc_draws", s.mc_draws);
  s.verify_instances = cfg.integer("verify_instances", s.verify_instances);
  s.inject_caa_asymmetry = cfg.flag("inject_caa_asymmetry", s.inject_caa_asymmetry);

  std::vector<RegimeConfig> all = default_regimes();
  for (std::size_t r = 0; r < all.size(); ++r) {
    const std::string prefix = fmt::format("r{}_", r + 1);
    all[r].sigma_n = cfg.number(prefix + "sigma_n", all[r].sigma_n);
    all[r].sigma_theta = cfg.number(prefix + "sigma_theta", all[r].sigma_theta);
  }
  s.regimes.clear();
  for (const auto& label : cfg.texts("regimes", {"R1", "R2", "R3"})) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const RegimeConfig& r) { return r.label == label; });
    if (it == all.end()) throw std::invalid_argument("unknown regime '" + label + "' (expected R1, R2 or R3)");
    s.regimes.push_back(*it);
  }
  s.validate();
  return s;
}

void ExperimentSettings::validate() const {
  ensemble().validate();
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("n_train and n_test must be positive");
  if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude must be positive");
  if (!(sigma_n >= 0.0)) throw std::invalid_argument("sigma_n must be nonnegative");
  if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (lambda && !(*lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (replicates < 1) throw std::invalid_argument("replicates must be positive");
  if (moment_draws < 2) throw std::invalid_argument("moment_draws must be at least 2");
  if (mc_draws < 2) throw std::invalid_argument("mc_draws must be at least 2");
  for (double a : alpha_grid) {
    if (!(a > 0.0)) throw std::invalid_argument("alpha_grid entries must be positive");
  }
  for (Index v : n_grid) {
    if (v < 1) throw std::invalid_argument("n_grid entries must be positive");
  }
  for (double v : sigma_std_grid) {
    if (!(v >= 0.0)) throw std::invalid_argument("sigma_std_grid entries must be nonnegative");
  }
}

DatasetManifest ExperimentSettings::manifest() const {
  DatasetManifest m;
  m.seed = seed;
  m.n = n;
  m.n_train = n_train;
  m.amplitude = amplitude;
  m.d = d;
  m.spread = spread;
  m.spread_std = spread_std;
  m.sigma_theta = sigma_theta;
  m.sigma_n = sigma_n;
  m.alpha = alpha;
  return m;
}

std::string ExperimentSettings::to_config_text() const {
  std::string out = manifest().to_string();
  out += fmt::format("n_test = {}\n", n_test);
  out += lambda ? fmt::format("lambda = {}\n", format_double(*lambda)) : std::string("lambda = auto\n");
  out += fmt::format("replicates = {}\n", replicates);
  out += "alpha_grid = " + join(alpha_grid) + "\n";
  std::string grid;
  for (std::size_t i = 0; i < n_grid.size(); ++i) grid += (i ? ", " : "") + std::to_string(n_grid[i]);
  out += "n_grid = " + grid + "\n";
  out += "sigma_std_grid = " + join(sigma_std_grid) + "\n";
  out += fmt::format("alpha_cv = {}\n", format_double(alpha_cv));
  out += fmt::format("cv_sigma_theta = {}\n", format_double(cv_sigma_theta));
  out += fmt::format("moment_draws = {}\n", moment_draws);
  std::string labels;
  for (std::size_t r = 0; r < regimes.size(); ++r) {
    labels += (r ? ", " : "") + regimes[r].label;
    const std::string prefix = fmt::format("r{}_", regimes[r].label.substr(1));
    out += fmt::format("{}sigma_n = {}\n{}sigma_theta = {}\n", prefix, format_double(regimes[r].sigma_n), prefix,
                       format_double(regimes[r].sigma_theta));
  }
  out += "regimes = " + labels + "\n";
  out += fmt::format("mc_draws = {}\n", mc_draws);
  out += fmt::format("verify_instances = {}\n", verify_instances);
  out += fmt::format("inject_caa_asymmetry = {}\n", inject_caa_asymmetry ? "true" : "false");
  return out;
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw PreconditionError("log-log fit needs at least 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw PreconditionError("log-log fit needs positive values");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const double mx = mean_of(lx);
  const double my = mean_of(ly);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("log-log fit needs at least two distinct abscissae");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

KernelSampler ensemble_sampler(const ShiftedKernelEnsemble& ens) {
  return [ens](Rng& rng) { return sample_kernel(ens, rng); };
}

// ---------------------------------------------------------------------------

DemoResult cmd_demo(const ExperimentSettings& s, const fs::path& out, bool plot,
                    std::optional<std::uint64_t> test_seed) {
  prepare_out(s, out);
  const ShiftedKernelEnsemble ens = s.ensemble();
  const GaussianPrior prior = manifest_prior(s.manifest());
  const ProblemMoments pm = induced_moments(prior, ens, s.sigma_n);
  const AffineEstimator est = lmmse_blind_signal(pm, s.lambda.value_or(0.0));

  const SampleSet test = generate_samples(prior, ens, s.sigma_n, 1, test_seed.value_or(derive_seed(s.seed, kDemoTest)));
  const Vector x = test.xs.col(0);
  const Vector y = test.ys.col(0);
  const Vector x_hat = est.apply(y);

  CsvTable table({"i", "x_true", "x_mean", "y", "x_hat"});
  for (Index i = 0; i < s.n; ++i) {
    table.add_row({cell(static_cast<std::int64_t>(i)), cell(x(i)), cell(pm.theta_x(i)), cell(y(i)), cell(x_hat(i))});
  }
  table.write(out / "demo.csv");

  if (plot) {
    std::vector<double> idx(static_cast<std::size_t>(s.n));
    std::iota(idx.begin(), idx.end(), 0.0);
    auto as_vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    SvgPlot svg("Reconstruction of a test signal", "index i", "value");
    svg.add_series("x (true)", idx, as_vec(x), false)
        .add_series("theta_x (prior mean)", idx, as_vec(pm.theta_x), false)
        .add_series("y (observed)", idx, as_vec(y), false)
        .add_series("x_hat (LMMSE)", idx, as_vec(x_hat), false);
    write_text_file(out / "demo.svg", svg.render());
  }
  const double n = static_cast<double>(s.n);
  return {(x_hat - x).squaredNorm() / n, (pm.theta_x - x).squaredNorm() / n};
}

std::vector<SweepResult> cmd_sweep_alpha(const ExperimentSettings& s, const fs::path& out, bool plot) {
  prepare_out(s, out);
  const ShiftedKernelEnsemble ens = s.ensemble();
  const OperatorEnsemble op = operator_cov_from_kernel(kernel_stats(ens));
  const auto moments = singular_moments_circulant(ensemble_sampler(ens), s.n, static_cast<std::size_t>(s.moment_draws),
                                                  derive_seed(s.seed, kAlphaMoments));
  const Vector theta_x = sinusoid_mean(s.n, s.amplitude);
  const double lambda = s.lambda.value_or(0.0);

  std::vector<SweepResult> results(s.alpha_grid.size());
  parallel_for(s.alpha_grid.size(), [&](std::size_t a) {
    const double alpha = s.alpha_grid[a];
    const GaussianPrior prior{theta_x, source_condition_prior(op, alpha).c_xx};
    const std::uint64_t train_seed = derive_seed(s.seed, kAlphaTrain, a);
    const CellOutcome c = evaluate_cell(prior, ens, s.sigma_n, moments, alpha, lambda, s, train_seed,
                                        derive_seed(s.seed, kAlphaTest, a));
    results[a] = {"sweep_alpha", "alpha", alpha, c.lhs_mean, c.lhs_std, c.rhs.total, c.rhs.term_noise,
                  c.rhs.term_operator, 0.0, s.n_test, train_seed};
  });

  CsvTable table({"alpha", "lhs_mean", "lhs_std", "rhs_total", "term_noise", "term_operator"});
  for (const auto& r : results) {
    table.add_row({cell(r.value), cell(r.lhs_mean), cell(r.lhs_std), cell(r.rhs_total), cell(r.term_noise),
                   cell(r.term_operator)});
  }
  table.write(out / "sweep_alpha.csv");

  if (plot) {
    std::vector<double> xs, lhs, rhs, lo, hi;
    for (const auto& r : results) {
      xs.push_back(r.value);
      lhs.push_back(r.lhs_mean);
      rhs.push_back(r.rhs_total);
      lo.push_back(std::max(r.lhs_mean - r.lhs_std, 1e-300));
      hi.push_back(r.lhs_mean + r.lhs_std);
    }
    SvgPlot svg("Approximation bound vs source-condition exponent", "alpha", "squared error");
    svg.log_y().add_band(xs, lo, hi).add_series("LHS (empirical error)", xs, lhs).add_series("RHS (bound)", xs, rhs);
    write_text_file(out / "sweep_alpha.svg", svg.render());
  }
  return results;
}

std::vector<SweepResult> cmd_sweep_cv(const ExperimentSettings& s, const fs::path& out, bool plot) {
  prepare_out(s, out);
  const Vector theta_x = sinusoid_mean(s.n, s.amplitude);
  const double lambda = s.lambda.value_or(0.0);
  const double alpha = s.alpha_cv;

  // Common random numbers across the grid: every point reuses the same
  // moment, training and test seeds, so only the width spread changes.
  std::vector<SweepResult> results(s.sigma_std_grid.size());
  parallel_for(s.sigma_std_grid.size(), [&](std::size_t c) {
    const double sigma_std = s.sigma_std_grid[c];
    const ShiftedKernelEnsemble ens{s.n, s.d, s.spread, s.cv_sigma_theta, sigma_std};
    const OperatorEnsemble op = operator_cov_from_kernel(kernel_stats(ens));
    const auto moments = singular_moments_circulant(ensemble_sampler(ens), s.n,
                                                    static_cast<std::size_t>(s.moment_draws),
                                                    derive_seed(s.seed, kCvMoments));
    const GaussianPrior prior{theta_x, source_condition_prior(op, alpha).c_xx};
    const std::uint64_t train_seed = derive_seed(s.seed, kCvTrain);
    const CellOutcome cell_out =
        evaluate_cell(prior, ens, s.sigma_n, moments, alpha, lambda, s, train_seed, derive_seed(s.seed, kCvTest));
    const double cv2 = (sigma_std / s.spread) * (sigma_std / s.spread);
    results[c] = {"sweep_cv", "sigma_std", sigma_std, cell_out.lhs_mean, cell_out.lhs_std, cell_out.rhs.total,
                  cell_out.rhs.term_noise, cell_out.rhs.term_operator, cv2, s.n_test, train_seed};
  });

  CsvTable table({"sigma_std", "cv2", "lhs_mean", "lhs_std", "rhs_total", "term_operator"});
  for (const auto& r : results) {
    table.add_row({cell(r.value), cell(r.cv2), cell(r.lhs_mean), cell(r.lhs_std), cell(r.rhs_total),
                   cell(r.term_operator)});
  }
  table.write(out / "sweep_cv.csv");

  if (plot) {
    std::vector<double> xs, lhs, rhs, op_term;
    for (const auto& r : results) {
      xs.push_back(r.value);
      lhs.push_back(r.lhs_mean);
      rhs.push_back(r.rhs_total);
      op_term.push_back(r.term_operator);
    }
    SvgPlot svg(fmt::format("Approximation bound vs kernel-width spread (alpha = {})", alpha), "sigma_std",
                "squared error");
    svg.add_series("LHS (empirical error)", xs, lhs)
        .add_series("RHS (bound)", xs, rhs)
        .add_series("RHS operator term", xs, op_term);
    write_text_file(out / "sweep_cv.svg", svg.render());
  }
  return results;
}

SweepNResult cmd_sweep_n(const ExperimentSettings& s, const fs::path& out, bool plot) {
  prepare_out(s, out);
  if (s.n_grid.empty()) throw std::invalid_argument("n_grid is empty");
  const Index n_min = *std::min_element(s.n_grid.begin(), s.n_grid.end());
  const std::size_t cells_per_regime = s.n_grid.size() * static_cast<std::size_t>(s.replicates);

  SweepNResult result;
  result.rows.resize(s.regimes.size() * cells_per_regime);
  std::vector<Matrix> per_test(s.regimes.size() * cells_per_regime);
  std::vector<double> lambdas(s.regimes.size());

  for (std::size_t r = 0; r < s.regimes.size(); ++r) {
    const RegimeConfig& reg = s.regimes[r];
    const ShiftedKernelEnsemble ens{s.n, s.d, s.spread, reg.sigma_theta, s.spread_std};
    DatasetManifest manifest = s.manifest();
    manifest.sigma_theta = reg.sigma_theta;
    manifest.sigma_n = reg.sigma_n;
    const GaussianPrior prior = manifest_prior(manifest);
    const ProblemMoments pm = induced_moments(prior, ens, reg.sigma_n);
    const std::uint64_t regime_seed = derive_seed(s.seed, kNTrain, r);
    auto train_seed = [&](std::size_t g, std::size_t rep) {
      return derive_seed(regime_seed, static_cast<std::uint64_t>(s.n_grid[g]), rep);
    };

    // λ is fixed once per regime, from the smallest training size, so every
    // N is compared against the same exact estimator.
    double lambda = 0.0;
    if (s.lambda) {
      lambda = *s.lambda;
    } else {
      const SampleSet pilot = generate_samples(prior, ens, reg.sigma_n, n_min, derive_seed(regime_seed, n_min, 0));
      const SamplingContext ctx = sampling_context(pm);
      const double k = sample_complexity_k(ctx, estimate_rho(pilot.xs, pilot.theta_x), estimate_rho(pilot.ys, pilot.theta_y));
      lambda = default_lambda(k, ctx.gamma, static_cast<std::uint64_t>(n_min));
    }
    lambdas[r] = lambda;

    const AffineEstimator exact = lmmse_blind_signal(pm, lambda);
    const SampleSet test = generate_samples(prior, ens, reg.sigma_n, s.n_test, derive_seed(s.seed, kNTest, r));
    const Matrix exact_test = exact.apply_columns(test.ys);

    parallel_for(cells_per_regime, [&](std::size_t c) {
      const std::size_t g = c / static_cast<std::size_t>(s.replicates);
      const std::size_t rep = c % static_cast<std::size_t>(s.replicates);
      const SampleSet train = generate_samples(prior, ens, reg.sigma_n, s.n_grid[g], train_seed(g, rep));
      const AffineEstimator est = empirical_lmmse(train, lambda);
      const auto errs = squared_errors(exact_test, est.apply_columns(test.ys));
      const std::size_t slot = r * cells_per_regime + c;
      per_test[slot] = Eigen::Map<const Vector>(errs.data(), static_cast<Index>(errs.size()));
      result.rows[slot] = {reg.label, s.n_grid[g], static_cast<Index>(rep), mean_of(errs)};
    });
  }

  for (std::size_t r = 0; r < s.regimes.size(); ++r) {
    std::vector<SweepNSummary> block;
    std::vector<std::pair<double, double>> points;
    for (std::size_t g = 0; g < s.n_grid.size(); ++g) {
      std::vector<double> errs;
      Vector test_mean = Vector::Zero(s.n_test);
      for (Index rep = 0; rep < s.replicates; ++rep) {
        const std::size_t slot = r * cells_per_regime + g * static_cast<std::size_t>(s.replicates) + static_cast<std::size_t>(rep);
        errs.push_back(result.rows[slot].err);
        test_mean += per_test[slot];
      }
      test_mean /= static_cast<double>(s.replicates);
      SweepNSummary sm;
      sm.regime = s.regimes[r].label;
      sm.n_train = s.n_grid[g];
      sm.err_mean = mean_of(errs);
      sm.err_std = std_of(errs);
      sm.test_spread = std_of(std::vector<double>(test_mean.data(), test_mean.data() + test_mean.size()));
      sm.lambda = lambdas[r];
      block.push_back(sm);
      points.emplace_back(static_cast<double>(sm.n_train), sm.err_mean);
    }
    const LogLogFit fit = points.size() >= 3 ? fit_loglog_slope(points) : LogLogFit{std::nan(""), std::nan(""), std::nan("")};
    for (auto& sm : block) {
      sm.fit = fit;
      result.summary.push_back(sm);
    }
  }

  CsvTable rows({"regime", "N", "replicate", "err"});
  for (const auto& row : result.rows) {
    rows.add_row({row.regime, cell(static_cast<std::int64_t>(row.n_train)), cell(static_cast<std::int64_t>(row.replicate)),
                  cell(row.err)});
  }
  rows.write(out / "sweep_n.csv");

  CsvTable summary({"regime", "N", "err_mean", "err_std", "test_spread", "slope", "intercept", "r2", "lambda"});
  for (const auto& sm : result.summary) {
    summary.add_row({sm.regime, cell(static_cast<std::int64_t>(sm.n_train)), cell(sm.err_mean), cell(sm.err_std),
                     cell(sm.test_spread), cell(sm.fit.slope), cell(sm.fit.intercept), cell(sm.fit.r2), cell(sm.lambda)});
  }
  summary.write(out / "sweep_n_summary.csv");

  if (plot) {
    SvgPlot svg("Convergence of the empirical estimator", "N (training samples)", "err_N");
    svg.log_x().log_y();
    for (const auto& reg : s.regimes) {
      std::vector<double> xs, ys, lo, hi;
      for (const auto& sm : result.summary) {
        if (sm.regime != reg.label) continue;
        xs.push_back(static_cast<double>(sm.n_train));
        ys.push_back(sm.err_mean);
        lo.push_back(std::max(sm.err_mean - sm.err_std, sm.err_mean * 1e-3));
        hi.push_back(sm.err_mean + sm.err_std);
      }
      svg.add_band(xs, lo, hi);
      double slope = std::nan("");
      for (const auto& sm : result.summary) {
        if (sm.regime == reg.label) slope = sm.fit.slope;
      }
      svg.add_series(fmt::format("{} (slope {:.2f})", reg.label, slope), xs, ys);
    }
    write_text_file(out / "sweep_n.svg", svg.render());
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> cmd_bounds(const ExperimentSettings& s, const fs::path& out) {
  prepare_out(s, out);
  const ShiftedKernelEnsemble ens = s.ensemble();
  const double alpha = s.alpha.value_or(1.0);
  const double beta = s.sigma_n * s.sigma_n;
  const KernelStats ks = kernel_stats(ens);
  const auto moments = singular_moments_circulant(ensemble_sampler(ens), s.n, static_cast<std::size_t>(s.moment_draws),
                                                  derive_seed(s.seed, kBoundsMoments));
  const OperatorEnsemble op = operator_cov_from_kernel(ks).with_singular_moments(moments);
  const SourceConditionPrior sc = source_condition_prior(op, alpha);
  const ProblemMoments pm{sinusoid_mean(s.n, s.amplitude), sc.c_xx, op, beta};
  const SamplingContext ctx = sampling_context(pm);
  const SampleSet pilot = generate_samples({pm.theta_x, pm.c_xx}, ens, s.sigma_n, s.n_train, derive_seed(s.seed, kBoundsPilot));
  const double rho_x = estimate_rho(pilot.xs, pilot.theta_x);
  const double rho_y = estimate_rho(pilot.ys, pilot.theta_y);
  const double k = sample_complexity_k(ctx, rho_x, rho_y);
  const auto n_train = static_cast<std::uint64_t>(s.n_train);
  const double lambda = s.lambda.value_or(default_lambda(k, ctx.gamma, n_train));

  std::vector<std::pair<std::string, std::string>> rows;
  auto put = [&](const std::string& name, double v) { rows.emplace_back(name, format_double(v)); };
  auto put_text = [&](const std::string& name, const std::string& v) { rows.emplace_back(name, v); };

  put("alpha", alpha);
  put("beta", beta);
  put("lambda", lambda);
  put("gamma", ctx.gamma);
  put("norm_cyy", ctx.cyy_norm);
  put("norm_cxx", ctx.cxx_norm);
  put("norm_cxy", ctx.cxy_norm);
  put("rho_x", rho_x);
  put("rho_y", rho_y);
  put("K", k);
  put("C1", constant_c1(alpha));
  put("C2", constant_c2(alpha));
  for (auto [mode, name] : {std::pair{ApproxConstants::statement, "approx_statement"},
                            std::pair{ApproxConstants::proof_printed, "approx_proof_printed"},
                            std::pair{ApproxConstants::proof_squared, "approx_proof_squared"}}) {
    const BoundReport r = approx_bound_rhs(pm, alpha, lambda, mode);
    put(std::string(name) + "_term_noise", r.term_noise);
    put(std::string(name) + "_term_operator", r.term_operator);
    put(std::string(name) + "_total", r.total);
  }
  put("gain_norm_bound", lmmse_norm_bound(alpha, beta, lambda));
  put("gain_norm_actual", spectral_norm(lmmse_blind_signal(pm, lambda).gain));
  put("nonblind_bound", nonblind_bound_rhs(alpha, beta, s.n));

  const double xi = 0.5 * (ctx.gamma + lambda);
  const double d = 1.0 / static_cast<double>(s.n + s.n);
  try {
    put("sampling_threshold", static_cast<double>(sampling_threshold(ctx, rho_x, rho_y, xi, d, lambda)));
    put("sampling_rhs_threshold_mode", sampling_bound_rhs(ctx, rho_x, rho_y, lambda, n_train, ThresholdMode{xi, d}).total);
  } catch (const PreconditionError& e) {
    put_text("sampling_rhs_threshold_mode", std::string("precondition failed: ") + e.what());
  }
  try {
    put("sampling_rhs_rate_mode", sampling_bound_rhs(ctx, rho_x, rho_y, lambda, n_train, RateMode{}).total);
  } catch (const PreconditionError& e) {
    put_text("sampling_rhs_rate_mode", std::string("precondition failed: ") + e.what());
  }
  const BoundReport main = main_bound_rhs(pm, alpha, lambda, rho_x, rho_y, n_train);
  put("main_term_sampling", main.term_sampling);
  put("main_total", main.total);
  put_text("main_preconditions", main.precondition_notes.empty() ? "met" : main.precondition_notes);

  CsvTable table({"quantity", "value"});
  for (const auto& [name, value] : rows) {
    std::string v = value;
    std::replace(v.begin(), v.end(), ',', ';');
    table.add_row({name, v});
  }
  table.write(out / "bounds.csv");
  return rows;
}

Dataset cmd_datagen(const ExperimentSettings& s, const fs::path& out) {
  prepare_out(s, out);
  Dataset data = generate_dataset(s.manifest());
  write_dataset(data, out);
  return data;
}

}  // namespace blmmse

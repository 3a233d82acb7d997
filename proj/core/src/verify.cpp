#include "blind_lmmse/verify.hpp"

#include "blind_lmmse/bounds.hpp"
#include "blind_lmmse/convolution.hpp"
#include "blind_lmmse/csv.hpp"
#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/estimators.hpp"
#include "blind_lmmse/instances.hpp"

#include <fmt/format.h>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace blmmse {

namespace {

using Index = Eigen::Index;

constexpr OperatorStructure kTags[] = {OperatorStructure::unstructured, OperatorStructure::independent_rows,
                                       OperatorStructure::independent_columns,
                                       OperatorStructure::independent_entries};

struct Instance {
  ProblemMoments pm;
  Rng rng;
};

// Instance j of a check: its own stream, random dimensions, cycling tags.
Instance make_instance(std::uint64_t seed, std::size_t j, Index max_dim) {
  Rng rng(derive_seed(seed, j), static_cast<std::uint64_t>(StreamTag::misc));
  const Index n = 1 + static_cast<Index>(rng.next_u32() % static_cast<std::uint32_t>(max_dim));
  const Index m = 1 + static_cast<Index>(rng.next_u32() % static_cast<std::uint32_t>(max_dim));
  ProblemMoments pm = random_problem(n, m, kTags[j % 4], rng);
  return {std::move(pm), rng};
}

Vector draw_observation(const ProblemMoments& pm, Rng& rng) { return GaussianModelSampler(pm).draw(rng).y; }

Matrix random_orthonormal(Index k, Rng& rng) {
  Matrix g(k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < k; ++i) g(i, j) = rng.normal();
  }
  return Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(k, k);
}

VerifyCheck fail_from(std::string name, const std::exception& e) {
  return {std::move(name), false, std::string("exception: ") + e.what(), false};
}

}  // namespace

bool VerifyReport::all_pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass || c.informational; });
}

std::string VerifyReport::to_string() const {
  std::string out;
  for (const auto& c : checks) {
    const char* status = c.informational ? "NOTE" : (c.pass ? "PASS" : "FAIL");
    out += fmt::format("{} {}: {}\n", status, c.name, c.detail);
  }
  out += all_pass() ? "RESULT PASS\n" : "RESULT FAIL\n";
  return out;
}

VerifyCheck check_tikhonov_signal(std::size_t instances, Index max_dim, std::uint64_t seed) {
  double worst = 0.0;
  try {
    for (std::size_t j = 0; j < instances; ++j) {
      auto [pm, rng] = make_instance(seed, j, max_dim);
      const Vector y = draw_observation(pm, rng);
      const Vector x_hat = lmmse_blind_signal(pm, 0.0).apply(y);
      const Vector x_tik = tikhonov_signal(pm, y, 0.0);
      worst = std::max(worst, (x_tik - x_hat).norm() / (1.0 + x_hat.norm()));
    }
  } catch (const std::exception& e) {
    return fail_from("tikhonov_signal", e);
  }
  return {"tikhonov_signal", worst <= 1e-8,
          fmt::format("max ‖x_tik − x_lmmse‖/(1+‖x̂‖) = {:.3e} over {} instances (tol 1e-8)", worst, instances)};
}

VerifyCheck check_tikhonov_operator(std::size_t instances, Index max_dim, std::uint64_t seed) {
  double worst = 0.0;
  try {
    for (std::size_t j = 0; j < instances; ++j) {
      auto [pm, rng] = make_instance(seed, j, max_dim);
      const Vector y = draw_observation(pm, rng);
      const Vector a_hat = lmmse_operator(pm, 0.0).apply(y);
      const Vector a_tik = tikhonov_operator(pm, y, 0.0);
      worst = std::max(worst, (a_tik - a_hat).norm() / (1.0 + a_hat.norm()));
    }
  } catch (const std::exception& e) {
    return fail_from("tikhonov_operator", e);
  }
  return {"tikhonov_operator", worst <= 1e-8,
          fmt::format("max ‖a_tik − a_lmmse‖/(1+‖â‖) = {:.3e} over {} instances (tol 1e-8)", worst, instances)};
}

VerifyCheck check_joint_decoupling(std::size_t instances, Index max_dim, std::uint64_t seed) {
  double worst = 0.0;
  try {
    for (std::size_t j = 0; j < instances; ++j) {
      auto [pm, rng] = make_instance(seed, j, max_dim);
      const Vector y = draw_observation(pm, rng);
      const JointEstimate joint = joint_estimate(pm, y, 0.0);
      const Vector x_hat = lmmse_blind_signal(pm, 0.0).apply(y);
      const Vector a_hat = lmmse_operator(pm, 0.0).apply(y);
      worst = std::max({worst, (joint.signal - x_hat).norm() / (1.0 + x_hat.norm()),
                        (joint.op - a_hat).norm() / (1.0 + a_hat.norm())});
    }
  } catch (const std::exception& e) {
    return fail_from("joint_decoupling", e);
  }
  return {"joint_decoupling", worst <= 1e-10,
          fmt::format("max relative gap to the standalone estimators = {:.3e} (tol 1e-10)", worst)};
}

VerifyCheck check_nonblind_reduction(std::size_t instances, Index max_dim, std::uint64_t seed) {
  double worst = 0.0;
  try {
    for (std::size_t j = 0; j < instances; ++j) {
      auto [pm, rng] = make_instance(seed, j, max_dim);
      const ProblemMoments fixed{pm.theta_x, pm.c_xx, OperatorEnsemble::deterministic(pm.op.mean_op()), pm.beta};
      const AffineEstimator blind = lmmse_blind_signal(fixed, 0.0);
      const AffineEstimator plain = lmmse_nonblind(pm.op.mean_op(), pm.c_xx, pm.beta, pm.theta_x, 0.0);
      worst = std::max({worst, max_abs(blind.gain - plain.gain), max_abs(blind.offset - plain.offset)});
    }
  } catch (const std::exception& e) {
    return fail_from("nonblind_reduction", e);
  }
  return {"nonblind_reduction", worst <= 1e-12,
          fmt::format("max entry gap with Caa = 0 = {:.3e} over {} instances (tol 1e-12)", worst, instances)};
}

VerifyCheck check_d_special_cases(std::size_t instances, Index max_dim, std::uint64_t seed) {
  double worst = 0.0;
  try {
    for (std::size_t j = 0; j < instances; ++j) {
      auto [pm, rng] = make_instance(seed, j, max_dim);
      const Matrix fast = interaction_matrix(pm);
      const Matrix slow = interaction_matrix_general(pm);
      worst = std::max(worst, max_abs(fast - slow) / (1.0 + max_abs(slow)));
    }
    // Circulant kernel ensemble, whose D uses the kernel-covariance fast path.
    Rng rng(derive_seed(seed, instances), static_cast<std::uint64_t>(StreamTag::misc));
    const Index n = std::max<Index>(2, max_dim);
    const KernelStats ks{Vector::Constant(n, 1.0 / static_cast<double>(n)), 0.1 * random_spd(n, rng)};
    const ProblemMoments pm{Vector::Ones(n), random_spd(n, rng), operator_cov_from_kernel(ks), 0.3};
    worst = std::max(worst, max_abs(interaction_matrix(pm) - interaction_matrix_general(pm)) /
                                (1.0 + max_abs(interaction_matrix_general(pm))));
  } catch (const std::exception& e) {
    return fail_from("d_special_cases", e);
  }
  return {"d_special_cases", worst <= 1e-12,
          fmt::format("max relative gap between structured and general D = {:.3e} (tol 1e-12)", worst)};
}

VerifyCheck check_mc_covariance(std::size_t instances, Index max_dim, Index draws, std::uint64_t seed, double n_se) {
  std::size_t outside = 0;
  std::size_t compared = 0;
  double worst_z = 0.0;
  try {
    for (std::size_t j = 0; j < instances; ++j) {
      auto [pm, rng] = make_instance(seed, j, max_dim);
      const GaussianModelSampler sampler(pm);
      const Vector theta_y = obs_mean(pm);
      const Matrix cyy = cov_obs_blind(pm).total;
      const Index m = pm.m();
      Matrix sum = Matrix::Zero(m, m);
      Matrix sum_sq = Matrix::Zero(m, m);
      for (Index k = 0; k < draws; ++k) {
        const Vector c = sampler.draw(rng).y - theta_y;
        const Matrix p = c * c.transpose();
        sum += p;
        sum_sq += p.cwiseProduct(p);
      }
      const double nd = static_cast<double>(draws);
      const Matrix mean = sum / nd;
      const Matrix var = (sum_sq / nd - mean.cwiseProduct(mean)) * (nd / (nd - 1.0));
      for (Index a = 0; a < m; ++a) {
        for (Index b = a; b < m; ++b) {
          const double se = std::sqrt(std::max(var(a, b), 0.0) / nd);
          const double z = std::abs(mean(a, b) - cyy(a, b)) / std::max(se, 1e-300);
          worst_z = std::max(worst_z, z);
          ++compared;
          if (z > n_se) ++outside;
        }
      }
    }
  } catch (const std::exception& e) {
    return fail_from("mc_covariance", e);
  }
  return {"mc_covariance", outside == 0,
          fmt::format("{} of {} entries outside {} SE over {} draws per instance (max |z| = {:.2f})", outside,
                      compared, n_se, draws, worst_z)};
}

VerifyCheck check_gain_norm_bound(const std::vector<double>& alphas, const std::vector<double>& levels, std::uint64_t seed) {
  std::string worst_case;
  double worst_ratio = 0.0;
  bool pass = true;
  try {
    Rng rng(seed, static_cast<std::uint64_t>(StreamTag::misc));
    const Index n = 6;
    const Index m = 5;
    std::vector<SingularMoment> moments;
    for (Index l = 0; l < std::min(m, n); ++l) {
      const double mu = 0.3 + 2.0 * rng.uniform();
      moments.push_back({mu, 0.3 * mu * mu * rng.uniform()});
    }
    const OperatorEnsemble shared =
        OperatorEnsemble::from_shared_basis(random_orthonormal(m, rng), random_orthonormal(n, rng), moments);
    const ProblemMoments scalar = scalar_instance(0.0);

    for (const auto& [label, op] : {std::pair<const char*, const OperatorEnsemble*>{"shared_basis", &shared},
                                    std::pair<const char*, const OperatorEnsemble*>{"scalar", &scalar.op}}) {
      for (double alpha : alphas) {
        const Matrix c_xx = source_condition_prior(*op, alpha).c_xx;
        for (double level : levels) {
          // Split β + λ evenly between noise and regularization.
          const ProblemMoments pm{Vector::Zero(op->cols()), c_xx, *op, 0.5 * level};
          const double actual = spectral_norm(lmmse_blind_signal(pm, 0.5 * level).gain);
          const double bound = lmmse_norm_bound(alpha, 0.5 * level, 0.5 * level);
          if (!(actual <= bound)) pass = false;
          if (actual / bound > worst_ratio) {
            worst_ratio = actual / bound;
            worst_case = fmt::format("{} alpha={} beta+lambda={}: ‖L‖={:.6g} bound={:.6g}", label, alpha, level,
                                     actual, bound);
          }
        }
      }
    }
  } catch (const std::exception& e) {
    return fail_from("gain_norm_bound", e);
  }
  return {"gain_norm_bound", pass, fmt::format("tightest case {} (ratio {:.4f})", worst_case, worst_ratio)};
}

VerifyReport run_verify(const ExperimentSettings& s) {
  VerifyReport report;
  const auto count = static_cast<std::size_t>(s.verify_instances);
  const std::uint64_t seed = s.seed;
  report.checks.push_back(check_tikhonov_signal(count, 8, derive_seed(seed, 1)));
  report.checks.push_back(check_tikhonov_operator(count, 8, derive_seed(seed, 2)));
  report.checks.push_back(check_joint_decoupling(count, 8, derive_seed(seed, 3)));
  report.checks.push_back(check_nonblind_reduction(count, 8, derive_seed(seed, 4)));
  report.checks.push_back(check_mc_covariance(1, 4, s.mc_draws, derive_seed(seed, 5)));
  report.checks.push_back(check_d_special_cases(count, 8, derive_seed(seed, 6)));
  report.checks.push_back(check_gain_norm_bound({0.5, 1.0, 2.0}, {0.1, 0.5, 1.0}, derive_seed(seed, 7)));

  // Checks on the configured convolution problem.
  const ShiftedKernelEnsemble ens = s.ensemble();
  const KernelStats ks = kernel_stats(ens);
  VerifyCheck inv{"ensemble_invariants", true, "kernel covariance symmetric PSD; operator ensemble valid"};
  try {
    Matrix c_kk = ks.c_kk;
    if (s.inject_caa_asymmetry) {
      c_kk(0, 1) += 1e-3 * std::max(max_abs(c_kk), 1e-12);
      inv.detail = "asymmetry injected into c_kk(0, 1)";
    }
    OperatorEnsemble::from_kernel_covariance(operator_mean_from_kernel(ks), c_kk).validate();
  } catch (const InvalidMomentsError& e) {
    inv.pass = false;
    inv.detail = e.what();
  } catch (const std::exception& e) {
    inv = fail_from("ensemble_invariants", e);
  }
  report.checks.push_back(inv);

  const GaussianPrior prior = manifest_prior(s.manifest());
  const ProblemMoments pm = induced_moments(prior, ens, s.sigma_n);
  SamplingContext ctx;
  try {
    ctx = sampling_context(pm);
    const bool a5 = ctx.cyy_norm >= ctx.cxx_norm;
    report.checks.push_back({"cyy_psd_and_a5", a5 && ctx.gamma >= 0.0,
                             fmt::format("gamma = {:.6g}, ‖Cyy‖ = {:.6g}, ‖Cxx‖ = {:.6g}", ctx.gamma,
                                         ctx.cyy_norm, ctx.cxx_norm)});
  } catch (const std::exception& e) {
    report.checks.push_back(fail_from("cyy_psd_and_a5", e));
    return report;
  }

  try {
    const SampleSet train = generate_samples(prior, ens, s.sigma_n, s.n_train, derive_seed(seed, 8));
    const double rho_x = estimate_rho(train.xs, train.theta_x);
    const double rho_y = estimate_rho(train.ys, train.theta_y);
    const double k = sample_complexity_k(ctx, rho_x, rho_y);
    const auto n_train = static_cast<std::uint64_t>(s.n_train);
    const double lambda = s.lambda.value_or(default_lambda(k, ctx.gamma, n_train));

    try {
      const AffineEstimator est = empirical_lmmse(train, lambda);
      report.checks.push_back({"empirical_estimator", est.gain.allFinite(),
                               fmt::format("lambda = {:.6g}, N = {}, condition number {:.3e}", lambda, s.n_train,
                                           est.condition_number)});
    } catch (const IllConditionedError& e) {
      report.checks.push_back(
          {"empirical_estimator", false, fmt::format("IllConditionedError: {} (lambda = {:.6g})", e.what(), lambda)});
    }

    const double gl = ctx.gamma + lambda;
    const double floor_lambda = 4.0 * std::sqrt(k / static_cast<double>(n_train));
    report.checks.push_back({"lambda_rule", gl >= floor_lambda,
                             fmt::format("lambda + gamma = {:.6g} >= 4 sqrt(K/N) = {:.6g} (K = {:.6g})", gl,
                                         floor_lambda, k)});
    const double n_needed = 16.0 * k / (gl * gl);
    report.checks.push_back({"rate_bound_sample_size", static_cast<double>(n_train) > n_needed,
                             fmt::format("N = {} > 16K/(gamma+lambda)^2 = {:.6g}", n_train, n_needed)});
    const bool n_above_k = static_cast<double>(n_train) > k;
    report.checks.push_back({"rate_bound_n_above_k", n_above_k,
                             fmt::format("N = {} {} K = {:.6g}; the rate bound also asks N > K", n_train,
                                         n_above_k ? ">" : "<=", k),
                             true});
  } catch (const std::exception& e) {
    report.checks.push_back(fail_from("sampling_preconditions", e));
  }
  return report;
}

VerifyReport cmd_verify(const ExperimentSettings& s, const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  write_text_file(out / "run_config.txt", s.to_config_text());
  VerifyReport report = run_verify(s);
  write_text_file(out / "verify.txt", report.to_string());
  return report;
}

}  // namespace blmmse

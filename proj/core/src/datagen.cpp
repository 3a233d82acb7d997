#include "blind_lmmse/datagen.hpp"

#include "blind_lmmse/bounds.hpp"
#include "blind_lmmse/config.hpp"
#include "blind_lmmse/csv.hpp"
#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace blmmse {

namespace {

using Index = Eigen::Index;

inline Index wrap(Index a, Index n) {
  const Index r = a % n;
  return r < 0 ? r + n : r;
}

// Parameters of the log-width distribution matching mean and std of w.
std::pair<double, double> lognormal_params(double mean, double std) {
  const double s2 = std::log1p((std / mean) * (std / mean));
  return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

}  // namespace

Vector sinusoid_mean(Index n, double amplitude) {
  if (n < 1) throw DimensionError("signal length must be positive");
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n));
  }
  return v;
}

GaussianPrior to_gaussian(const SinusoidPrior& p) {
  if (!(p.amplitude > 0.0)) throw PreconditionError("amplitude must be positive");
  return {p.mean(), p.covariance()};
}

void ShiftedKernelEnsemble::validate() const {
  if (n < 1) throw PreconditionError("kernel embedding length must be positive");
  if (d < 1 || d > n) throw PreconditionError(fmt::format("kernel support d = {} must lie in [1, n = {}]", d, n));
  if (!(spread > 0.0)) throw PreconditionError("kernel spread must be positive");
  if (!(sigma_theta >= 0.0)) throw PreconditionError("sigma_theta must be nonnegative");
  if (!(spread_std >= 0.0)) throw PreconditionError("spread_std must be nonnegative");
}

std::vector<Index> kernel_offsets(Index d) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(d));
  const Index first = -(d - 1) / 2;
  for (Index j = 0; j < d; ++j) out.push_back(first + j);
  return out;
}

Vector kernel_profile(const ShiftedKernelEnsemble& ens, double theta, double width) {
  if (!(width > 0.0)) throw PreconditionError("kernel width must be positive");
  const auto offsets = kernel_offsets(ens.d);
  // Log-domain normalization so far shifts cannot underflow to an all-zero kernel.
  std::vector<double> expo(offsets.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    const double u = static_cast<double>(offsets[j]) - theta;
    expo[j] = -u * u / (2.0 * width * width);
    top = std::max(top, expo[j]);
  }
  double total = 0.0;
  for (double& e : expo) {
    e = std::exp(e - top);
    total += e;
  }
  Vector k = Vector::Zero(ens.n);
  for (std::size_t j = 0; j < offsets.size(); ++j) k(wrap(offsets[j], ens.n)) += expo[j] / total;
  return k;
}

Vector sample_kernel(const ShiftedKernelEnsemble& ens, Rng& rng) {
  const double theta = ens.sigma_theta * rng.normal();
  double width = ens.spread;
  if (ens.spread_std > 0.0) {
    const auto [mu, s] = lognormal_params(ens.spread, ens.spread_std);
    width = std::exp(mu + s * rng.normal());
  }
  return kernel_profile(ens, theta, width);
}

Vector sample_kernel(const ShiftedKernelEnsemble& ens, std::uint64_t seed) {
  ens.validate();
  Rng rng = Rng::substream(seed, 0, StreamTag::kernel);
  return sample_kernel(ens, rng);
}

std::pair<Vector, Vector> gauss_hermite(int order) {
  if (order < 1) throw PreconditionError("Gauss-Hermite order must be positive");
  // Golub-Welsch: the Jacobi matrix of the monic probabilists' Hermite
  // polynomials has off-diagonal entries sqrt(i).
  Matrix jacobi = Matrix::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  Vector nodes = es.eigenvalues();
  Vector weights = es.eigenvectors().row(0).transpose().array().square();
  weights /= weights.sum();
  return {nodes, weights};
}

KernelStats kernel_stats(const ShiftedKernelEnsemble& ens, int order) {
  ens.validate();
  const auto rule = gauss_hermite(order);
  const Vector one_node = Vector::Zero(1);
  const Vector one_weight = Vector::Ones(1);
  const bool shift_random = ens.sigma_theta > 0.0;
  const bool width_random = ens.spread_std > 0.0;
  const Vector& tn = shift_random ? rule.first : one_node;
  const Vector& tw = shift_random ? rule.second : one_weight;
  const Vector& wn = width_random ? rule.first : one_node;
  const Vector& ww = width_random ? rule.second : one_weight;
  const auto [mu, s] = width_random ? lognormal_params(ens.spread, ens.spread_std) : std::pair{0.0, 0.0};

  std::vector<Vector> kernels;
  std::vector<double> weights;
  for (Index a = 0; a < tn.size(); ++a) {
    for (Index b = 0; b < wn.size(); ++b) {
      const double width = width_random ? std::exp(mu + s * wn(b)) : ens.spread;
      kernels.push_back(kernel_profile(ens, ens.sigma_theta * tn(a), width));
      weights.push_back(tw(a) * ww(b));
    }
  }
  KernelStats ks;
  ks.theta_k = Vector::Zero(ens.n);
  for (std::size_t i = 0; i < kernels.size(); ++i) ks.theta_k += weights[i] * kernels[i];
  // Centred second pass: a deterministic kernel gives an exactly zero covariance.
  ks.c_kk = Matrix::Zero(ens.n, ens.n);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const Vector dev = kernels[i] - ks.theta_k;
    ks.c_kk.noalias() += weights[i] * dev * dev.transpose();
  }
  ks.c_kk = 0.5 * (ks.c_kk + ks.c_kk.transpose()).eval();
  return ks;
}

Matrix sample_signals(const GaussianPrior& prior, Index count, std::uint64_t seed) {
  if (count < 1) throw PreconditionError("need at least one sample");
  const Index n = prior.mean.size();
  if (prior.covariance.rows() != n || prior.covariance.cols() != n) {
    throw DimensionError("prior covariance must be n×n");
  }
  require_symmetric_psd(prior.covariance, "signal covariance");
  const Matrix root = psd_sqrt(prior.covariance, "signal covariance");
  Matrix xs(n, count);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t j) {
    Rng rng = Rng::substream(seed, j, StreamTag::signal);
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    xs.col(static_cast<Index>(j)) = prior.mean + root * z;
  });
  return xs;
}

ProblemMoments induced_moments(const GaussianPrior& prior, const ShiftedKernelEnsemble& ens, double sigma_n) {
  if (prior.mean.size() != ens.n) throw DimensionError("prior and kernel lengths differ");
  const KernelStats ks = kernel_stats(ens);
  return {prior.mean, prior.covariance, operator_cov_from_kernel(ks), sigma_n * sigma_n};
}

SampleSet generate_samples(const GaussianPrior& prior, const ShiftedKernelEnsemble& ens, double sigma_n,
                           Index count, std::uint64_t seed) {
  ens.validate();
  if (!(sigma_n >= 0.0)) throw PreconditionError("sigma_n must be nonnegative");
  const Index n = ens.n;
  if (prior.mean.size() != n) throw DimensionError("prior and kernel lengths differ");

  SampleSet s;
  s.xs = sample_signals(prior, count, seed);
  s.ys.resize(n, count);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t j) {
    Rng krng = Rng::substream(seed, j, StreamTag::kernel);
    Rng nrng = Rng::substream(seed, j, StreamTag::noise);
    const Vector k = sample_kernel(ens, krng);
    Vector y = circular_convolve(k, s.xs.col(static_cast<Index>(j)));
    for (Index i = 0; i < n; ++i) y(i) += sigma_n * nrng.normal();
    s.ys.col(static_cast<Index>(j)) = y;
  });
  s.theta_x = prior.mean;
  s.theta_y = circular_convolve(kernel_stats(ens).theta_k, prior.mean);
  return s;
}

std::string DatasetManifest::to_string() const {
  std::string out;
  out += fmt::format("seed = {}\n", seed);
  out += fmt::format("n = {}\n", n);
  out += fmt::format("n_train = {}\n", n_train);
  out += fmt::format("amplitude = {}\n", amplitude);
  out += fmt::format("d = {}\n", d);
  out += fmt::format("spread = {}\n", spread);
  out += fmt::format("spread_std = {}\n", spread_std);
  out += fmt::format("sigma_theta = {}\n", sigma_theta);
  out += fmt::format("sigma_n = {}\n", sigma_n);
  out += alpha ? fmt::format("alpha = {}\n", *alpha) : std::string("alpha = none\n");
  out += fmt::format("generator_version = {}\n", generator_version);
  return out;
}

DatasetManifest DatasetManifest::parse(const std::string& text) {
  const Config cfg = Config::parse(text, "manifest");
  cfg.require_known({"seed", "n", "n_train", "amplitude", "d", "spread", "spread_std", "sigma_theta", "sigma_n",
                     "alpha", "generator_version"});
  DatasetManifest m;
  m.seed = std::stoull(cfg.text("seed", "0"));
  m.n = cfg.integer("n", m.n);
  m.n_train = cfg.integer("n_train", m.n_train);
  m.amplitude = cfg.number("amplitude", m.amplitude);
  m.d = cfg.integer("d", m.d);
  m.spread = cfg.number("spread", m.spread);
  m.spread_std = cfg.number("spread_std", m.spread_std);
  m.sigma_theta = cfg.number("sigma_theta", m.sigma_theta);
  m.sigma_n = cfg.number("sigma_n", m.sigma_n);
  const std::string a = cfg.text("alpha", "none");
  if (a != "none") m.alpha = cfg.number("alpha", 0.0);
  m.generator_version = cfg.text("generator_version", kGeneratorVersion);
  if (m.generator_version != kGeneratorVersion) {
    throw std::invalid_argument("manifest generator_version '" + m.generator_version + "' does not match this build ('" +
                                kGeneratorVersion + "')");
  }
  return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  const Config cfg = Config::load(path);
  std::string text;
  for (const auto& [k, v] : cfg.values()) text += k + " = " + v + "\n";
  return parse(text);
}

GaussianPrior manifest_prior(const DatasetManifest& m) {
  if (!m.alpha) return to_gaussian(SinusoidPrior{m.n, m.amplitude});
  const ShiftedKernelEnsemble ens = m.ensemble();
  const OperatorEnsemble op = operator_cov_from_kernel(kernel_stats(ens));
  const SourceConditionPrior sc = source_condition_prior(op, *m.alpha);
  return {sinusoid_mean(m.n, m.amplitude), sc.c_xx};
}

Dataset generate_dataset(const DatasetManifest& manifest) {
  const GaussianPrior prior = manifest_prior(manifest);
  return {generate_samples(prior, manifest.ensemble(), manifest.sigma_n, manifest.n_train, manifest.seed), manifest};
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "manifest.txt", data.manifest.to_string());
  write_samples_csv(dir / "x.csv", data.samples.xs);
  write_samples_csv(dir / "y.csv", data.samples.ys);
}

}  // namespace blmmse

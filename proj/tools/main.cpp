// blind-lmmse: command line driver for the reproduction experiments.

#include "blind_lmmse/config.hpp"
#include "blind_lmmse/errors.hpp"
#include "blind_lmmse/experiments.hpp"
#include "blind_lmmse/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<long long> n_train;
  std::optional<long long> replicates;
  bool plot = false;
};

blmmse::ExperimentSettings load_settings(const Options& o) {
  blmmse::Config cfg = o.config_path.empty() ? blmmse::Config{} : blmmse::Config::load(o.config_path);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.lambda) cfg.set("lambda", fmt::format("{}", *o.lambda));
  if (o.n_train) cfg.set("n_train", std::to_string(*o.n_train));
  if (o.replicates) cfg.set("replicates", std::to_string(*o.replicates));
  return blmmse::ExperimentSettings::from_config(cfg);
}

int run(const std::string& command, const Options& o) {
  const blmmse::ExperimentSettings s = load_settings(o);
  const std::filesystem::path out = o.out_dir;
  if (command == "demo") {
    const auto r = blmmse::cmd_demo(s, out, o.plot);
    fmt::print("demo: per-entry MSE of x_hat {:.6g}, of the prior mean {:.6g}\n", r.mse_estimate, r.mse_mean);
  } else if (command == "sweep-alpha" || command == "sweep-cv") {
    const auto rows = command == "sweep-alpha" ? blmmse::cmd_sweep_alpha(s, out, o.plot) : blmmse::cmd_sweep_cv(s, out, o.plot);
    for (const auto& r : rows) {
      fmt::print("{} = {:<6g} lhs {:.6g} ± {:.3g}  rhs {:.6g}\n", r.parameter, r.value, r.lhs_mean, r.lhs_std,
                 r.rhs_total);
    }
  } else if (command == "sweep-n") {
    const auto res = blmmse::cmd_sweep_n(s, out, o.plot);
    std::string last;
    for (const auto& sm : res.summary) {
      if (sm.regime == last) continue;
      last = sm.regime;
      fmt::print("{}: slope {:.4f} (r2 {:.4f}), lambda {:.6g}\n", sm.regime, sm.fit.slope, sm.fit.r2, sm.lambda);
    }
  } else if (command == "verify") {
    const auto report = blmmse::cmd_verify(s, out);
    fmt::print("{}", report.to_string());
    return report.all_pass() ? 0 : 1;
  } else if (command == "bounds") {
    for (const auto& [name, value] : blmmse::cmd_bounds(s, out)) fmt::print("{:<32} {}\n", name, value);
  } else if (command == "datagen") {
    const auto data = blmmse::cmd_datagen(s, out);
    fmt::print("datagen: {} samples of length {} written to {}\n", data.samples.size(), data.samples.xs.rows(), out.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind LMMSE estimation: experiments, bound checks and data generation"};
  app.require_subcommand(1, 1);
  Options o;
  for (const char* name : {"demo", "sweep-alpha", "sweep-cv", "sweep-n", "verify", "bounds", "datagen"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_flag("--plot", o.plot, "also write SVG figures");
    sub->add_option("--lambda", o.lambda, "regularization of the estimators (default: automatic)");
    sub->add_option("--n-train", o.n_train, "number of training samples");
    sub->add_option("--replicates", o.replicates, "training replicates per sweep cell");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "blind-lmmse %s: %s\n", command.c_str(), e.what());
    return 2;
  }
}

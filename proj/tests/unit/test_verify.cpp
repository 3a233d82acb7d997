#include "blind_lmmse/verify.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace blmmse {
namespace {

ExperimentSettings quick() {
  ExperimentSettings s;
  s.n = 32;
  s.d = 9;
  s.verify_instances = 8;
  s.mc_draws = 20000;
  return s;
}

const VerifyCheck* find(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

TEST(Verify, DefaultSuitePasses) {
  const VerifyReport r = run_verify(quick());
  EXPECT_TRUE(r.all_pass()) << r.to_string();
  EXPECT_NE(r.to_string().find("RESULT PASS"), std::string::npos);
}

TEST(Verify, InjectedAsymmetryFailsWithNamedInvariant) {
  ExperimentSettings s = quick();
  s.inject_caa_asymmetry = true;
  const VerifyReport r = run_verify(s);
  EXPECT_FALSE(r.all_pass());
  const VerifyCheck* c = find(r, "ensemble_invariants");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->pass);
  EXPECT_NE(c->detail.find("row_cov_symmetry"), std::string::npos) << c->detail;
}

TEST(Verify, UnregularizedRankDeficientEstimatorFails) {
  ExperimentSettings s = quick();
  s.lambda = 0.0;
  s.n_train = 10;  // fewer samples than the signal length
  const VerifyReport r = run_verify(s);
  const VerifyCheck* c = find(r, "empirical_estimator");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->pass);
  EXPECT_NE(c->detail.find("IllConditionedError"), std::string::npos) << c->detail;
}

TEST(Verify, InformationalLinesNeverFail) {
  VerifyReport r;
  r.checks.push_back({"note", false, "gap", true});
  EXPECT_TRUE(r.all_pass());
  EXPECT_NE(r.to_string().find("NOTE note"), std::string::npos);
}

TEST(Verify, WritesReport) {
  const auto dir = testing::scratch_dir("verify_report");
  const VerifyReport r = cmd_verify(quick(), dir);
  std::ifstream in(dir / "verify.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), r.to_string());
}

}  // namespace
}  // namespace blmmse

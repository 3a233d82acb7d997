#pragma once

#include "blind_lmmse/instances.hpp"
#include "blind_lmmse/moments.hpp"

#include <filesystem>
#include <string>

namespace blmmse::testing {

/// n = m = 1, Cxx = 1, Θ = 1, Var(a) = 0.25, β = 0.5; the mean θx varies.
inline ProblemMoments instance_s(double theta_x = 0.0) { return scalar_instance(theta_x); }

/// Fresh scratch directory for one test.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(BLIND_LMMSE_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace blmmse::testing

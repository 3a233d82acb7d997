#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace blmmse {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input moments violate a named invariant (symmetry, PSD, singular-value moments).
class InvalidMomentsError : public std::invalid_argument {
 public:
  InvalidMomentsError(std::string invariant, const std::string& detail)
      : std::invalid_argument("invariant violated [" + invariant + "]: " + detail),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// A linear system is too ill-conditioned to solve without regularization.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A bound or estimator was evaluated outside its stated preconditions.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace blmmse

#pragma once

#include <stdexcept>
#include <string>

namespace folia {

/// Raised when a point, index or domain argument is outside its valid range.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A construction or stage invariant does not hold. `condition` names it,
/// e.g. "(a)" for the radius-halving rule or "support-disjoint".
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string condition, const std::string& what)
      : std::runtime_error(condition + ": " + what), condition_(std::move(condition)) {}

  const std::string& condition() const { return condition_; }

 private:
  std::string condition_;
};

/// An iterative inverse (fixed point or flow polish) failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace folia

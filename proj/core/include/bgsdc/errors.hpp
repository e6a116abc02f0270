#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bgsdc {

/// Field evaluated on the symmetry axis of a cylindrical model (R = 0).
class DegeneratePointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not deliver a usable result
/// (ill-conditioned moment system, non-finite state, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trajectory integration produced a non-finite state.
class NonFiniteStateError : public NumericalError {
 public:
  NonFiniteStateError(std::size_t step, const std::string& what)
      : NumericalError("non-finite state at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace bgsdc

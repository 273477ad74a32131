#pragma once

#include <stdexcept>
#include <string>

namespace ksd {

// Base class for library errors. The CLI maps each subclass to an exit code.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated argument precondition: bad sizes, non-finite values, out-of-range
// parameters.
struct input_error : error {
  using error::error;
};

// Structurally invalid model, e.g. a covariance that is not symmetric
// positive definite.
struct model_error : error {
  using error::error;
};

// Degenerate construction, e.g. a perturbation direction that is zero on the
// support of the base mass function.
struct degeneracy_error : input_error {
  using input_error::input_error;
};

// Perturbation step large enough to drive a mass function negative.
struct negativity_error : input_error {
  using input_error::input_error;
};

// Iterative scheme exhausted its budget before reaching the requested
// tolerance. Carries the running estimate and the achieved error bound.
struct convergence_error : error {
  convergence_error(const std::string& what, double estimate_, double error_bound_)
      : error(what), estimate(estimate_), error_bound(error_bound_) {}
  double estimate;
  double error_bound;
};

// File could not be opened or read.
struct io_error : error {
  using error::error;
};

}  // namespace ksd

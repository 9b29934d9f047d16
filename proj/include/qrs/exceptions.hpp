#pragma once

#include <stdexcept>
#include <string>

namespace qrs {

// Bad input to an operation (non-finite point, out-of-square argument, ...).
struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A point handed to an inverse branch lies outside the branch image.
struct branch_domain_error : std::runtime_error {
  explicit branch_domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A chain construction could not complete; carries a human-readable reason
// and leaves partial results with the caller.
struct algorithm_error : std::runtime_error {
  explicit algorithm_error(const std::string& what) : std::runtime_error(what) {}
};

// Loss of numerical meaning (non-convergence, degenerate derivative, ...).
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Internal signal: a single chain step failed and the caller should shrink
// the previous ball and retry.
struct step_failure : std::runtime_error {
  explicit step_failure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qrs

#pragma once

#include <stdexcept>
#include <string>

namespace mgip {

/// Input that violates a documented precondition or invariant (bad file,
/// out-of-range parameter, mismatched mesh). Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical or I/O failure during computation (factorization failure,
/// non-finite values, degenerate estimator). Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mgip

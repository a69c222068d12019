#pragma once

#include <stdexcept>
#include <string>

namespace bss {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Kernel evaluated at its singular point.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Series or path too short for the requested operation.
class LengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A statistic is undefined because the data carry no variation
/// (constant or affine paths).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance matrix not numerically positive definite, even after jitter.
class CholeskyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (bad CSV, non-equidistant grid).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bss

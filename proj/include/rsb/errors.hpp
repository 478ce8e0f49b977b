#pragma once

#include <stdexcept>
#include <string>

namespace rsb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed inputs: shapes, orderings, ranges, brackets.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class OrderingViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BracketViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Well-formed inputs at which a formula has no finite value.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SusceptibilityDivergence : public DomainError {
 public:
  using DomainError::DomainError;
};

class NonFiniteIntegrand : public DomainError {
 public:
  using DomainError::DomainError;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace rsb

#pragma once

#include <stdexcept>
#include <string>

namespace ovf {

/// Input violates a mathematical precondition (negative support value,
/// non-projection block, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A value object could not be built because one of its invariants failed.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shapes or measure spaces of two operands disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed serialized input (missing key, wrong type, truncated document).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data that should come from an orthogonal vector field does not satisfy the
/// relations such a field must satisfy.
class InconsistentFieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ovf

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advseq {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different alphabets.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a type invariant (mass floor, normalization, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The two convex sets intersect, so no positive divergence separates them.
class SetsOverlapError : public Error {
 public:
  using Error::Error;
};

/// Test parameters produce non-positive thresholds for the instance.
class InfeasibleSpecError : public Error {
 public:
  using Error::Error;
};

/// Operation applied to a test kind that does not support it.
class KindError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive computation would exceed its configured budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t required, std::size_t budget)
      : Error(what + " (required " + std::to_string(required) + ", budget " +
              std::to_string(budget) + ")"),
        required_(required),
        budget_(budget) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t required_;
  std::size_t budget_;
};

/// A dp_policy adversary was queried outside the states its table covers.
class PolicyDomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed problem or result file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace advseq

#pragma once

#include <stdexcept>
#include <string>

namespace ergraph {

/// Input that violates a structural requirement (asymmetry, bad sizes, ...).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Request exceeds a configured size guard (dense limits).
class CapacityError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Argument outside the domain of a mathematical function.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A root-finding problem without an admissible solution.
class NoSolutionError : public std::domain_error {
public:
  NoSolutionError(const std::string& what, double boundary_value)
      : std::domain_error(what), boundary_value_(boundary_value) {}
  double boundary_value() const noexcept { return boundary_value_; }

private:
  double boundary_value_;
};

} // namespace ergraph

#pragma once

#include <stdexcept>
#include <string>

namespace plaus {

// Bad caller input: wrong dimensions, unknown identifiers, malformed data.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Mathematically inadmissible input: parameter outside the model's space,
// empty set intersection, data outside the support.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// A requested evaluation mode the model cannot provide (e.g. exact
// enumeration for a continuous model).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-convergence, singular information, bracket loss.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace plaus

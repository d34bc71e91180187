#pragma once

#include <stdexcept>
#include <string>

namespace concentra {

// A documented precondition of an operation does not hold (e.g. a verifier
// asked to certify a non-monotone function). The CLI maps this to exit 2.
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// A size guard was exceeded (enumeration too large). The CLI maps this to exit 2.
class GuardError : public std::length_error {
 public:
  explicit GuardError(const std::string& what) : std::length_error(what) {}
};

// The min-norm-point solver hit its iteration cap. This indicates a solver bug,
// never a data condition.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace concentra

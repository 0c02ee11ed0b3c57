#pragma once

#include <stdexcept>
#include <string>

namespace lecam {

// Input violates a mathematical precondition (negative variance, density
// below its class bound, a point outside [0,1], ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller misuse: wrong arity, bad grid sizes, malformed specs.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to meet its tolerance.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lecam

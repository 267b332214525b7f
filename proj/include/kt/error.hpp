#pragma once

#include <stdexcept>
#include <string>

namespace kt {

// Data or numeric failure: malformed input, non-PSD kernel, unreachable cut.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an invalid configuration or argument combination.
class UsageError : public Error {
public:
  using Error::Error;
};

}  // namespace kt

#pragma once

#include <stdexcept>
#include <string>

namespace llmag {

/// Bad input: a violated precondition, invalid configuration or malformed file.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The numerics failed: non-finite state, solver breakdown, zero-length cell.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace llmag

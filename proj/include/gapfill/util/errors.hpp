#pragma once

#include <stdexcept>
#include <string>

namespace gapfill {

// Bad input data or unusable files (missing corpus, corrupt checkpoint, ...).
// The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at runtime (divergence, non-finite values). Exit code 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gapfill

#pragma once

#include <stdexcept>
#include <string>

namespace fluentnet {

/// Malformed or missing input data (files, CSV rows, datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or numerical breakdown during computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace fluentnet

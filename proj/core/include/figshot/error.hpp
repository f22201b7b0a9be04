#pragma once

#include <stdexcept>
#include <string>

namespace figshot {

/// Base error for every failure raised by the pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transient failure (network, overloaded backend). Callers may retry.
class RetryableError : public Error {
 public:
  using Error::Error;
};

}  // namespace figshot

#pragma once

#include <stdexcept>
#include <string>

namespace bicr {

// Invalid input: bad sizes, out-of-range parameters, malformed files.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that would exceed a configured resource limit
// (e.g. exhaustive enumeration over too many assignments).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimator that is undefined for the realized data (e.g. an empty arm).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bicr

#pragma once

#include <stdexcept>
#include <string>

namespace tubekit {

// Shape/axis disagreement between tensors (message names the offending axes).
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where finite ones are required (NaN coords, NaN loss, ...).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user-supplied parameter (alpha < 1, unsupported scale, bad config key).
struct ParamError : std::runtime_error {
  explicit ParamError(const std::string& msg) : std::runtime_error(msg) {}
};

// File system / serialization failures.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tubekit

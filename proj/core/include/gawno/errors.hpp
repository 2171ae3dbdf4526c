#pragma once

#include <stdexcept>
#include <string>

namespace gawno {

/// Tensor rank/dimension mismatch between operands.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration value, unknown key, or malformed config text.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed, or inconsistent input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation invoked on an object in the wrong state
/// (missing parameter, shape-incompatible checkpoint, ...).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite value detected where the pipeline requires finite numbers.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gawno

#pragma once

#include <stdexcept>

namespace wbary {

// Argument errors use std::invalid_argument; the types below cover the
// remaining failure classes.

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input that is well formed but cannot define the requested object,
/// such as an all-zero image as a probability measure.
struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace wbary

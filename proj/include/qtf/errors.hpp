#pragma once

#include <stdexcept>
#include <string>

namespace qtf {

/// Bad input: invalid config, malformed file, out-of-range ids. CLI exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem exceeds a configured resource ceiling (qubits, dense size). CLI exit code 3.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qtf

#pragma once

#include <stdexcept>
#include <string>

namespace poisonrank {

// Error taxonomy mirrored by the CLI exit codes: configuration problems exit
// with 2, file problems with 3, and internal invariant violations with 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace poisonrank

#pragma once

#include <stdexcept>
#include <string>

namespace toomqca {

// Rejected configuration: bad lattice size, violated schedule inequality,
// malformed table file. Maps to exit status 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A runtime invariant (counter gap, fault locality, ...) was observed broken.
// Maps to exit status 3 in the CLI.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedGate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace toomqca

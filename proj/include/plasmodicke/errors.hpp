#pragma once

#include <stdexcept>
#include <string>

namespace plasmodicke {

// Bad user input: unparsable config, missing keys, invalid parameter ranges.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical invariant was violated (trace drift, negative populations,
// non-PSD overlap) and automatic refinement did not recover it.
struct invariant_error : std::runtime_error {
  explicit invariant_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver failed to reach its tolerance.
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace plasmodicke

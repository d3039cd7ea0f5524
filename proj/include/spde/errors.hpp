#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spde {

// Configuration / parameter problems: CLI exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Mathematical gates (m_p infinite, Dalang fails, uncovered pair): exit code 3.
struct MomentGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DalangError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical aborts (blow-up, NaN): exit code 4.
struct BlowUpError : std::runtime_error {
  std::size_t step;
  explicit BlowUpError(std::size_t step_, const std::string& what_)
      : std::runtime_error(what_), step(step_) {}
};

} // namespace spde

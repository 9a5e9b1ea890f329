#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uniac {

using Shape = std::vector<std::size_t>;

// Thrown when tensor/layer extents don't line up.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a documented precondition is violated (stepping a finished
// episode, non-scalar loss, eta <= 0, ...).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Thrown when a NaN/inf reaches a place that must stay finite; carries the
// offending parameter name in the message.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::size_t numel_of(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace uniac

#pragma once

#include <stdexcept>
#include <string>

namespace supercm {

// Dimension or layout mismatch between operands.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument value (empty input, odd count, out-of-domain parameter).
struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Class label or index outside its valid range.
struct IndexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value where a finite one is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse: stale cache, empty accumulator, exhausted pool.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File unreadable or unwritable.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace supercm

#pragma once

#include <stdexcept>
#include <string>

namespace mpe {

// Malformed input, unresolved tokens, contract violations driven by data.
// The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values during training (learning-rate blow-up etc).
// The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mpe

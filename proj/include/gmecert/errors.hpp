#pragma once

#include <stdexcept>
#include <string>

namespace gmecert {

/// Invalid input shape, label or range.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical routine failed to reach its stated accuracy.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of the operation (e.g. sqrt of an
/// indefinite matrix).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace gmecert

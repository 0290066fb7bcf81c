#pragma once

#include <stdexcept>
#include <string>

namespace ccpca {

/// Malformed or inconsistent input (bad file, unknown cluster, empty complement, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that cannot produce a meaningful result for well-formed input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccpca

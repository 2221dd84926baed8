#pragma once

#include <stdexcept>
#include <string>

namespace kkhol {

// All library errors derive from std::runtime_error so callers can catch
// broadly; the CLI maps InvalidArgument to the "invalid input" exit code.
class InvalidArgument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateBandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuantizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kkhol

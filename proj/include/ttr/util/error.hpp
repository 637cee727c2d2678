#pragma once

#include <stdexcept>
#include <string>

namespace ttr {

// Base of every error thrown by the toolkit; what() carries the diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration: unknown keys, missing target column, invalid
// architecture numbers.
class ConfigError : public Error {
  using Error::Error;
};

// Input text that does not parse (CSV cell, rule file token). The message
// names the offending location.
class ParseError : public Error {
  using Error::Error;
};

// Structurally valid input that fails a precondition (empty dataset, too few
// rows to split).
class InputError : public Error {
  using Error::Error;
};

// API misuse: argument shapes or values outside the documented contract.
class ContractError : public Error {
  using Error::Error;
};

// Operation called on an object in the wrong state.
class StateError : public Error {
  using Error::Error;
};

// Optimization diverged: non-finite loss or parameters.
class TrainingError : public Error {
  using Error::Error;
};

}  // namespace ttr

#pragma once

#include <stdexcept>
#include <string>

namespace ragnar {

// Argument outside the mathematical domain of an operation (probability
// outside [0,1], horizon < 1, empty metric input, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Not enough history, index out of range, window too short.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Malformed or inconsistent input data (duplicates, gaps, zero index levels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration. `key()` names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Mismatched dimensions between related objects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Analytic neighbour-set distribution requested beyond the exact depth.
class UnsupportedStageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Regression with fewer usable rows than coefficients.
class UnderdeterminedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage was run before the stage that produces its inputs.
class StageOrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// External forecast file shares no (origin, horizon) cell with the backtest.
class EmptyOverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ragnar

// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>

namespace polyaurn {

// Scheme parameter or argument outside its admissible domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A predictive weight sum disagrees with the declared total weight
// function, or every weight vanished so no draw can be made.
class ConditionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested enumeration size exceeds the configured cap.
class SizeGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed scheme configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polyaurn

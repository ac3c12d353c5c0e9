#pragma once

#include <stdexcept>
#include <string>

namespace pitmo {

/// Input outside a function's mathematical domain (e.g. a decision vector
/// outside the box bounds).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid arguments or mismatched dimensions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sample has fewer than two distinct values, so no CDF can be built.
class DegenerateDistributionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values encountered during optimization or training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration, missing artifacts, refused overwrites.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pitmo

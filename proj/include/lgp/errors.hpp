#pragma once

#include <stdexcept>
#include <string>

namespace lgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, domain violations, invalid configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Unknown patient / arm lookups.
class LookupError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Factorization failures, degenerate weights, non-finite intermediates.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgp

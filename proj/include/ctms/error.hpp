#pragma once

#include <stdexcept>
#include <string>

namespace ctms {

/// Base for every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input value lies outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unusable configuration (CFL violation, empty feasible set, bad grid).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The simulation produced a NaN or a negative quantity it should never produce.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid scenario/model/corpus file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctms

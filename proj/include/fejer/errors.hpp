#pragma once

#include <stdexcept>
#include <string>

namespace fejer {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

/// The approximate maximization oracle could not certify its epsilon gap.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Rate inputs outside the admissible range (e.g. M^2 b >= 2).
class InvalidRange : public Error {
 public:
  using Error::Error;
};

/// A bound would exceed the configured digit (or recursion) budget.
class SizeOverflow : public Error {
 public:
  using Error::Error;
};

/// A query referenced an index past the recorded trajectory horizon.
class HorizonExceeded : public Error {
 public:
  HorizonExceeded(std::size_t k, std::size_t horizon)
      : Error("index " + std::to_string(k) + " exceeds recorded horizon " +
              std::to_string(horizon)) {}
};

class Undecided : public Error {
 public:
  using Error::Error;
};

}  // namespace fejer

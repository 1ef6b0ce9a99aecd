#pragma once

#include <stdexcept>
#include <string>

namespace zksip {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition: mixed fields, bad lengths, bad indices.
struct UsageError : Error {
  using Error::Error;
};
struct DivisionByZero : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct EmptySupport : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct DegenerateParameter : ParameterError {
  using ParameterError::ParameterError;
};
struct StreamOverflow : Error {
  using Error::Error;
};
struct OnePassViolation : Error {
  using Error::Error;
};
struct SpaceBoundViolation : Error {
  using Error::Error;
};
struct AccountingError : Error {
  using Error::Error;
};
struct ScheduleViolation : Error {
  using Error::Error;
};
struct Underdetermined : Error {
  using Error::Error;
};
struct Infeasible : Error {
  using Error::Error;
};
struct ResourceError : Error {
  using Error::Error;
};
// Custom verifier without a whitebox oracle handed to the simulator.
struct UnsupportedVerifier : Error {
  using Error::Error;
};

}  // namespace zksip

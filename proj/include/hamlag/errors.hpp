#pragma once

#include <stdexcept>
#include <string>

namespace hamlag {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating scenario input.
struct SchemaError : Error {
  using Error::Error;
};

/// A realized submanifold left the valid chart range.
struct ChartRangeError : Error {
  using Error::Error;
};

/// An operation was invoked outside its stated preconditions.
struct PreconditionError : Error {
  using Error::Error;
};

/// Numerical failure: solver breakdown, no convergence, no root.
struct NumericError : Error {
  using Error::Error;
};

/// The bordered system is singular beyond the supplied constraints:
/// the Jacobi kernel is larger than the candidate span.
struct DegeneracyError : NumericError {
  using NumericError::NumericError;
};

}  // namespace hamlag

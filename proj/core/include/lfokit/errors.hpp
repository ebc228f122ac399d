#pragma once

#include <stdexcept>
#include <string>

namespace lfokit {

/// Base class for every error the toolkit raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input stream or file violates the documented format.
struct MalformedInput : Error {
  using Error::Error;
};

/// Too few samples or points to run the operation.
struct InsufficientData : Error {
  using Error::Error;
};

/// Parameter outside its documented range (window, period, ...).
struct InvalidParameter : Error {
  using Error::Error;
};

/// Semantically invalid call (count mismatch, empty truth, ...).
struct InvalidInput : Error {
  using Error::Error;
};

/// Every token of a sentence was filtered out before the distance solve.
struct EmptyAfterFiltering : Error {
  using Error::Error;
};

/// Out-of-vocabulary token under the strict OOV policy.
struct UnknownWord : Error {
  using Error::Error;
};

/// Matching has no valid assignment (fewer segments than instructions).
struct Infeasible : Error {
  using Error::Error;
};

/// Point cloud does not determine the requested geometric model.
struct DegenerateGeometry : Error {
  using Error::Error;
};

}  // namespace lfokit

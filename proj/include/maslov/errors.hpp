#pragma once

#include <stdexcept>
#include <string>

namespace maslov {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad parameters, malformed documents, dimension mismatches.
struct InputError : Error {
  using Error::Error;
};

// Jordan structure the normal-form machinery does not handle.
struct UnsupportedDegeneracy : Error {
  using Error::Error;
};

// Two eigenvalue families too close to be told apart.
struct SpectralAmbiguity : Error {
  using Error::Error;
};

// A ceiling/floor or root-of-unity test sits on a floating guard band.
struct ResonanceError : Error {
  using Error::Error;
};

// Adaptive winding refinement did not converge.
struct RefinementBudget : Error {
  using Error::Error;
};

// A quantity proven to be an integer (or an identity proven to hold) failed.
struct ConsistencyError : Error {
  using Error::Error;
};

}  // namespace maslov

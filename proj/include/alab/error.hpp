#pragma once
#include <stdexcept>
#include <string>

namespace alab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Caller passed data that violates a documented precondition.
struct InvalidInput : Error {
  using Error::Error;
};
// The perturbation parameter is outside the range where a construction is valid
// (gap too small, contraction lost, box exit). Sweeps skip the point.
struct RegimeError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};

}  // namespace alab

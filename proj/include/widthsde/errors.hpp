#pragma once

#include <stdexcept>
#include <string>

namespace widthsde {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonpositiveWidth : Error {
  using Error::Error;
};
struct NonpositiveXi : Error {
  using Error::Error;
};
struct NonpositiveDivisorCoefficient : Error {
  using Error::Error;
};
struct InvalidPhysicalInput : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericalOverflow : Error {
  using Error::Error;
};
struct GridExhausted : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct WindowMismatch : Error {
  using Error::Error;
};
struct PositivityViolated : Error {
  using Error::Error;
};

}  // namespace widthsde

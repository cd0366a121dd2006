#pragma once

#include <stdexcept>
#include <string>

namespace lsk {

// Base of everything the library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad parameters, bad config files, unknown keys.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite values, divergence, failed integration.
struct NumericalError : Error {
  using Error::Error;
};

// Field contents violate a documented range (e.g. alpha outside [0,1]).
struct DataIntegrityError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace lsk

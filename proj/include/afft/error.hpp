#pragma once

#include <stdexcept>
#include <string>

namespace afft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed files, bad arguments, violated preconditions on user data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A well-formed input that the pipeline could not process
/// (e.g. objects too far apart, rank-deficient registration).
class ComputeError : public Error {
 public:
  using Error::Error;
};

}  // namespace afft

#pragma once

#include <stdexcept>

namespace posekit {

/// Base class for every error raised by posekit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated a documented invariant (bad index, size mismatch,
/// degenerate bone, non-finite coordinate, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An objective became non-finite during optimization.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace posekit

#pragma once

#include <stdexcept>
#include <string>

namespace rstar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot was non-positive. Callers typically respond by adding jitter.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t pivot_index, double pivot_value)
      : Error("matrix is not positive definite: pivot " + std::to_string(pivot_index) + " = " +
              std::to_string(pivot_value)),
        pivot_index_(pivot_index),
        pivot_value_(pivot_value) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
};

class SingularShiftedSystem : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace rstar

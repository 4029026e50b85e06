#pragma once

#include <stdexcept>
#include <string>

namespace lmcf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different grids.
class SpecMismatchError : public Error {
 public:
  using Error::Error;
};

/// Derivative order outside 1..4.
class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

/// Bad argument (odd grid size, non-finite input, short amplitude list, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint I/O, magic/version or length problems.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A trajectory sample left the small-data region psi < eps1^2.
class RegionViolationError : public Error {
 public:
  using Error::Error;
};

/// Second variation requested along a constant (null) direction.
class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

/// Series passed to a decay fit is not strictly positive on the window.
class NonPositiveSeriesError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate in the time stepper.
class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, double t, double sup_u)
      : Error(what), t_(t), sup_u_(sup_u) {}
  double t() const noexcept { return t_; }
  double sup_u() const noexcept { return sup_u_; }

 private:
  double t_;
  double sup_u_;
};

}  // namespace lmcf

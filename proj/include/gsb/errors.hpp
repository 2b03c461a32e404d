#pragma once

#include <stdexcept>
#include <string>

namespace gsb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function was asked for a value outside its domain (0^A with A <= 0,
/// log of zero, parameter outside the model's open interval, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The support could not be truncated within the requested tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A J matrix was too ill-conditioned to invert.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

/// An iterative procedure did not produce an acceptable answer.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed user input (files, configs, flags).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace gsb

#pragma once

#include <stdexcept>
#include <string>

namespace ssstab {

// Base of every error thrown by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Y_ll block of a Kron reduction is numerically singular; usually an islanded network.
class SingularInteriorError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Bad command-line or configuration input. The CLI maps it to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

class NotSettledError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssstab

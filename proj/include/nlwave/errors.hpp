#pragma once

#include <stdexcept>
#include <string>

namespace nlwave {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ScalarSolveFailed : public Error {
 public:
  using Error::Error;
};

class NonlinearSolveFailed : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class InstabilityDetected : public Error {
 public:
  using Error::Error;
};

class NewtonDiverged : public Error {
 public:
  using Error::Error;
};

class JacobianSingular : public Error {
 public:
  using Error::Error;
};

class NoUnstableDirections : public Error {
 public:
  using Error::Error;
};

class DegenerateDamping : public Error {
 public:
  using Error::Error;
};

/// Integration failure with the time at which the step failed.
class IntegrationFailed : public Error {
 public:
  IntegrationFailed(const std::string& what, double time)
      : Error(what + " (at t=" + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace nlwave

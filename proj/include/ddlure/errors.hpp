#pragma once

#include <stdexcept>
#include <string>

namespace ddlure {

// Base of everything the library throws. The CLI maps any Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed values: non-finite entries, bad parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Mathematical domain violation, e.g. square root of an indefinite matrix.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold (rank assumptions,
// time-domain mismatch, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Valid input that falls outside the cases the synthesis conditions cover.
class UnsupportedCase : public Error {
 public:
  using Error::Error;
};

// Discrete simulation produced a non-finite state.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Continuous integration failed (step-size collapse or divergence).
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class CertificateCorrupt : public Error {
 public:
  using Error::Error;
};

// Ill-formed LMI problem detected before the solver runs.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddlure

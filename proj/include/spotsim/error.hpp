#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spotsim {

// Base of every error thrown by the core. The C API maps each subclass to a
// status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The input could not be read at all (missing file, unreadable stream).
class IoError : public Error {
public:
  using Error::Error;
};

// The input was read but is not well-formed (bad JSON, bad CSV, wrong types).
class ParseError : public Error {
public:
  using Error::Error;
};

struct Diagnostic {
  std::string location;
  std::string message;
};

// Well-formed input that violates a domain invariant. Carries one diagnostic
// per violation so callers can report all of them at once.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  ValidationError(std::string location, std::string message);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

// A lookup key that has no entry (instance, region, price, series point).
class NotFoundError : public Error {
public:
  using Error::Error;
};

// A job whose resource demands no allowed instance type can ever satisfy.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

}  // namespace spotsim

#pragma once

#include <stdexcept>
#include <string>

namespace curvkit {

enum class ErrorKind {
  InvalidInput,
  Capability,
  Numeric,
  DegenerateSpectrum,
  EmptySample,
  Domain,
  Config,
  Convention,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Eigensolver or root-polish failure; carries the residual that was reached.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(ErrorKind::Numeric, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace curvkit

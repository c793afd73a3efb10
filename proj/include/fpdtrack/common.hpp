#pragma once

#include <stdexcept>
#include <string>

namespace fpdtrack {

inline constexpr const char* kVersion = "0.1.0";

/// Thrown when a linear-algebra step fails (singular innovation or
/// predicted covariance, NaN log-likelihood). Carries context such as
/// the block index in the message.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed input files; message carries the line number.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative fit exhausts its iteration budget.
/// Carries the last iterate so callers can inspect or reuse it.
class FitError : public std::runtime_error {
public:
  FitError(const std::string& what, double last_f, double last_u_f)
      : std::runtime_error(what), last_f(last_f), last_u_f(last_u_f) {}
  double last_f;
  double last_u_f;
};

}  // namespace fpdtrack

#pragma once

#include <stdexcept>
#include <string>

namespace pv5 {

enum class ErrorKind {
  pole,
  domain,
  branch,
  singular_state,
  degenerate_seed,
  singularity_encountered,
  tolerance_failure,
  radius_too_small,
  structure_violation,
  overflow,
  c_zero,
  no_solution,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by integrate() when the flow cannot be continued; carries the t reached.
class SingularityError : public Error {
 public:
  SingularityError(double t, const std::string& what)
      : Error(ErrorKind::singularity_encountered, what), t_(t) {}
  double t() const { return t_; }

 private:
  double t_;
};

}  // namespace pv5

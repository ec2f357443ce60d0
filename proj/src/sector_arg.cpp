#include <cmath>

#include "pv5/complex.hpp"
#include "pv5/errors.hpp"

namespace pv5 {

SectorArg::SectorArg(Complex z) : modulus_(std::abs(z)), arg_(std::arg(z)) {}

SectorArg::SectorArg(double modulus, double branch_arg) : modulus_(modulus), arg_(branch_arg) {
  if (!(modulus >= 0.0) || !std::isfinite(modulus) || !std::isfinite(branch_arg))
    throw Error(ErrorKind::domain, "SectorArg: modulus must be finite and nonnegative");
}

SectorArg SectorArg::with_branch(Complex z, double branch_arg) {
  const SectorArg s(std::abs(z), branch_arg);
  if (std::abs(s.value() - z) > 1e-12 * std::abs(z))
    throw Error(ErrorKind::branch, "SectorArg: branch_arg inconsistent with value");
  return s;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::pole: return "pole";
    case ErrorKind::domain: return "domain";
    case ErrorKind::branch: return "branch";
    case ErrorKind::singular_state: return "singular_state";
    case ErrorKind::degenerate_seed: return "degenerate_seed";
    case ErrorKind::singularity_encountered: return "singularity_encountered";
    case ErrorKind::tolerance_failure: return "tolerance_failure";
    case ErrorKind::radius_too_small: return "radius_too_small";
    case ErrorKind::structure_violation: return "structure_violation";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::c_zero: return "c_zero";
    case ErrorKind::no_solution: return "no_solution";
  }
  return "unknown";
}

}  // namespace pv5

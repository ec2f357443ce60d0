#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace pv5 {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

// A point together with an explicitly chosen continuous argument.
// value() is reconstructed from (modulus, branch_arg), so two SectorArgs built
// from the same pair evaluate identically.
class SectorArg {
 public:
  SectorArg() = default;
  // Principal branch, arg in (-pi, pi].
  SectorArg(Complex z);  // NOLINT(google-explicit-constructor)
  SectorArg(double modulus, double branch_arg);

  // Throws BranchError if exp(i*branch_arg)*|z| does not reproduce z.
  static SectorArg with_branch(Complex z, double branch_arg);

  double modulus() const { return modulus_; }
  double branch_arg() const { return arg_; }
  Complex value() const { return std::polar(modulus_, arg_); }

  Complex log() const { return {std::log(modulus_), arg_}; }
  Complex pow(Complex p) const { return std::exp(p * log()); }

  SectorArg rotated(double dtheta) const { return {modulus_, arg_ + dtheta}; }
  SectorArg scaled(double factor) const { return {modulus_ * factor, arg_}; }

 private:
  double modulus_ = 0.0;
  double arg_ = 0.0;
};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace pv5

#pragma once

#include <utility>

#include "pv5/complex.hpp"

namespace pv5 {

// A function value together with its derivative in the argument.
struct Jet {
  Complex value;
  Complex deriv;
};

// Complex Gamma function. Throws Error(pole) at nonpositive integers.
Complex gamma(Complex z);
// 1/Gamma(z); zero at the poles of Gamma.
Complex rgamma(Complex z);
// Principal-branch-free log Gamma (continuous for Re z > 0).
Complex log_gamma(Complex z);

// Kummer's M(a, b, x) by direct summation; intended for |x| <= 10.
Complex kummer_m(Complex a, Complex b, Complex x);

Complex whittaker_M(Complex kappa, Complex mu, const SectorArg& z);
Complex whittaker_W(Complex kappa, Complex mu, const SectorArg& z);
Jet whittaker_M_jet(Complex kappa, Complex mu, const SectorArg& z);
Jet whittaker_W_jet(Complex kappa, Complex mu, const SectorArg& z);

// I1 is entire, so only z.value() matters.
Complex bessel_I1(const SectorArg& z);
Complex bessel_K1(const SectorArg& z);
Jet bessel_I1_jet(Complex z);
Jet bessel_K1_jet(const SectorArg& z);

struct BesselPair {
  Jet k1;
  Jet i1;
};
// (K1, I1) on branch z.branch_arg() built from principal values with
// K1(z) = -K1(z e^{-2 pi i}) - 2 K1(z e^{-pi i}),
// I1(z) = (K1(z e^{-pi i}) + K1(z)) / (pi i).
BesselPair bessel_continuation(const SectorArg& z);

namespace detail {
// Switchover radii; exposed for the continuity tests.
inline constexpr double kKummerRadius = 10.0;
inline constexpr double kWhittakerAsymRadius = 40.0;
inline constexpr double kI1SeriesRadius = 10.0;
inline constexpr double kK1SeriesRadius = 2.0;
inline constexpr double kBesselAsymRadius = 20.0;
}  // namespace detail

}  // namespace pv5

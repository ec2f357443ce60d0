#include <algorithm>
#include <cmath>

#include "pv5/errors.hpp"
#include "pv5/specialfn.hpp"
#include "taylor_continuation.hpp"

namespace pv5 {
namespace {

using LComplex = std::complex<long double>;

constexpr double kEulerGamma = 0.57721566490153286060651209;
constexpr double kMaxBranch = 2.5 * kPi + 1e-12;
constexpr double kK1ArcRadius = 6.0;

LComplex widen(Complex z) { return {z.real(), z.imag()}; }
Complex narrow(LComplex z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

const detail::LinearOde2 kBesselOde{{0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {-1.0, 0.0, -1.0}};

Jet i1_series(Complex z) {
  const LComplex half = widen(z) / 2.0L;
  const LComplex q = half * half;
  LComplex term = half;  // (z/2)^{2k+1} / (k! (k+1)!)
  LComplex sum = term;
  LComplex dterm = 0.5L;  // (2k+1)/2 (z/2)^{2k} / (k! (k+1)!)
  LComplex dsum = dterm;
  LComplex base = 1.0L;   // (z/2)^{2k} / (k! (k+1)!)
  for (int k = 1; k < 500; ++k) {
    base *= q / static_cast<long double>(k * (k + 1));
    term = base * half;
    dterm = base * (2.0L * k + 1.0L) / 2.0L;
    sum += term;
    dsum += dterm;
    if (std::abs(dterm) <= 1e-21L * std::abs(dsum) && std::abs(term) <= 1e-21L * std::abs(sum)) break;
    if (base == 0.0L) break;
  }
  return {narrow(sum), narrow(dsum)};
}

// Principal-branch K1 for |z| <= 2 (arg in (-pi, pi]).
Jet k1_series(const SectorArg& z) {
  const Complex x = z.value();
  const Jet i1 = i1_series(x);
  const Complex lg = z.log() - std::log(2.0);
  const LComplex half = widen(x) / 2.0L;
  const LComplex q = half * half;
  LComplex base = 1.0L;  // (z^2/4)^k / (k! (k+1)!)
  long double psi1 = -kEulerGamma, psi2 = 1.0L - kEulerGamma;  // psi(k+1), psi(k+2)
  LComplex s = 0.0L, ds = 0.0L;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      base *= q / static_cast<long double>(k * (k + 1));
      psi1 += 1.0L / k;
      psi2 += 1.0L / (k + 1);
    }
    const LComplex t = (psi1 + psi2) * base;
    s += t;
    ds += (2.0L * k + 1.0L) * t;
    if (k > 2 && std::abs(t) * (2 * k + 1) <= 1e-21L * std::abs(ds)) break;
  }
  const Complex tail = narrow(widen(x) / 4.0L * s);
  const Complex dtail = narrow(ds / 4.0L);
  return {1.0 / x + lg * i1.value - tail, -1.0 / (x * x) + i1.value / x + lg * i1.deriv - dtail};
}

Jet k1_asymptotic(const SectorArg& z) {
  const Complex x = z.value();
  Complex term = 1.0, sum = 1.0, dsum = 0.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (4.0 - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += term;
    dsum += -double(k) * term / x;
    last = mag;
    if (mag <= 1e-18) break;
  }
  const Complex pref = std::sqrt(kPi / 2.0) * z.pow(-0.5) * std::exp(-x);
  const Complex value = pref * sum;
  return {value, value * (-1.0 - 0.5 / x) + pref * dsum};
}

Jet k1_principal(const SectorArg& z) {
  const double r = z.modulus();
  const double theta = z.branch_arg();
  if (r <= detail::kK1SeriesRadius) return k1_series(z);
  if (r >= detail::kBesselAsymRadius) return k1_asymptotic(z);
  const double r0 = detail::kBesselAsymRadius;
  const double theta0 = std::clamp(theta, -kPi / 2, kPi / 2);
  const Jet start = k1_asymptotic(SectorArg(r0, theta0));
  std::vector<Complex> nodes;
  if (theta == theta0) {
    nodes = {std::polar(r0, theta0), std::polar(r, theta)};
  } else {
    nodes = detail::ray_arc_ray(r0, theta0, std::min(r, kK1ArcRadius), theta, r);
  }
  return detail::continue_path(kBesselOde, nodes, start);
}

bool principal(double theta) { return theta > -kPi - 1e-15 && theta <= kPi + 1e-15; }

Jet k1_any(const SectorArg& z) {
  const double theta = z.branch_arg();
  if (principal(theta)) return k1_principal(SectorArg(z.modulus(), std::clamp(theta, -kPi, kPi)));
  // d/dz K1(z e^{-i pi}) = -K1'(.), d/dz K1(z e^{-2 i pi}) = K1'(.)
  if (theta > 0.0) {
    const Jet a = k1_any(z.rotated(-2.0 * kPi));
    const Jet b = k1_any(z.rotated(-kPi));
    return {-a.value - 2.0 * b.value, -a.deriv + 2.0 * b.deriv};
  }
  const Jet a = k1_any(z.rotated(2.0 * kPi));
  const Jet b = k1_any(z.rotated(kPi));
  return {-a.value - 2.0 * b.value, -a.deriv + 2.0 * b.deriv};
}

void check_k1_arg(const SectorArg& z) {
  if (z.modulus() == 0.0) throw Error(ErrorKind::domain, "bessel_K1: origin singularity");
  if (std::abs(z.branch_arg()) > kMaxBranch) throw Error(ErrorKind::branch, "bessel: |branch_arg| > 5pi/2");
}

}  // namespace

Jet bessel_I1_jet(Complex z) {
  const double r = std::abs(z);
  if (r <= detail::kI1SeriesRadius) return i1_series(z);
  const double theta = std::arg(z);
  if (r < detail::kBesselAsymRadius) {
    const Complex z0 = std::polar(detail::kI1SeriesRadius, theta);
    return detail::continue_segment(kBesselOde, z0, i1_series(z0), z);
  }
  // I1 = (K1(z e^{-i pi}) + K1(z)) / (i pi) for arg z in (0, pi], mirrored otherwise.
  const SectorArg zs(r, theta);
  const Jet k = k1_asymptotic(zs);
  if (theta > 0.0) {
    const Jet km = k1_asymptotic(zs.rotated(-kPi));
    return {(km.value + k.value) / (kI * kPi), (-km.deriv + k.deriv) / (kI * kPi)};
  }
  const Jet kp = k1_asymptotic(zs.rotated(kPi));
  return {-(kp.value + k.value) / (kI * kPi), -(-kp.deriv + k.deriv) / (kI * kPi)};
}

Jet bessel_K1_jet(const SectorArg& z) {
  check_k1_arg(z);
  return k1_any(z);
}

Complex bessel_I1(const SectorArg& z) {
  if (std::abs(z.branch_arg()) > kMaxBranch) throw Error(ErrorKind::branch, "bessel: |branch_arg| > 5pi/2");
  return bessel_I1_jet(z.value()).value;
}

Complex bessel_K1(const SectorArg& z) { return bessel_K1_jet(z).value; }

BesselPair bessel_continuation(const SectorArg& z) {
  check_k1_arg(z);
  if (principal(z.branch_arg())) return {bessel_K1_jet(z), bessel_I1_jet(z.value())};
  const Jet k = k1_any(z);
  const Jet km = k1_any(z.rotated(-kPi));
  return {k, {(km.value + k.value) / (kI * kPi), (-km.deriv + k.deriv) / (kI * kPi)}};
}

}  // namespace pv5

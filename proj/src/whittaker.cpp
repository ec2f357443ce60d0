#include <algorithm>
#include <cmath>

#include "pv5/errors.hpp"
#include "pv5/specialfn.hpp"
#include "taylor_continuation.hpp"

namespace pv5 {
namespace {

using LComplex = std::complex<long double>;

constexpr double kMaxBranch = 1.5 * kPi + 1e-12;
constexpr double kArcRadius = 8.0;

void check_branch(const SectorArg& z) {
  if (std::abs(z.branch_arg()) > kMaxBranch)
    throw Error(ErrorKind::branch, "whittaker: |branch_arg| > 3pi/2 unsupported");
}

void check_mu(Complex mu) {
  const Complex b = 1.0 + 2.0 * mu;
  if (b.imag() == 0.0 && b.real() <= 0.0 && b.real() == std::round(b.real()))
    throw Error(ErrorKind::pole, "whittaker: 1+2mu is a nonpositive integer");
}

detail::LinearOde2 whittaker_ode(Complex kappa, Complex mu) {
  // z^2 w'' - (z^2/4 - kappa z + mu^2 - 1/4) w = 0
  return {{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, {-(mu * mu - 0.25), kappa, -0.25}};
}

struct KummerJet {
  LComplex value, deriv;
};

KummerJet kummer_jet(Complex a, Complex b, Complex x) {
  const LComplex la{a.real(), a.imag()}, lb{b.real(), b.imag()}, lx{x.real(), x.imag()};
  LComplex term = 1.0L, sum = 1.0L, ksum = 0.0L;
  const long double xabs = std::abs(lx);
  for (int k = 0; k < 5000; ++k) {
    term *= (la + static_cast<long double>(k)) / ((lb + static_cast<long double>(k)) * static_cast<long double>(k + 1)) * lx;
    sum += term;
    ksum += static_cast<long double>(k + 1) * term;
    if (k > xabs && std::abs(term) * (k + 2) <= 1e-21L * (std::abs(sum) + std::abs(ksum))) break;
    if (term == 0.0L) break;
  }
  return {sum, xabs == 0.0L ? la / lb : ksum / lx};
}

Jet m_series(Complex kappa, Complex mu, const SectorArg& z) {
  const Complex x = z.value();
  const Complex a = mu - kappa + 0.5, b = 1.0 + 2.0 * mu;
  const KummerJet k = kummer_jet(a, b, x);
  const Complex kv{static_cast<double>(k.value.real()), static_cast<double>(k.value.imag())};
  const Complex kd{static_cast<double>(k.deriv.real()), static_cast<double>(k.deriv.imag())};
  const Complex pref = std::exp(-0.5 * x) * z.pow(mu + 0.5);
  return {pref * kv, pref * (kv * (-0.5 + (mu + 0.5) / x) + kd)};
}

Jet w_asymptotic(Complex kappa, Complex mu, const SectorArg& z) {
  const Complex x = z.value();
  const Complex a = 0.5 + mu - kappa, b = 0.5 - mu - kappa;
  Complex term = 1.0, sum = 1.0, dsum = 0.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (a + double(k - 1)) * (b + double(k - 1)) / (double(k) * -x);
    const double mag = std::abs(term);
    if (mag > last && k > 2) break;
    sum += term;
    dsum += -double(k) * term / x;
    last = mag;
    if (mag <= 1e-18 * std::abs(sum)) break;
  }
  const Complex pref = std::exp(-0.5 * x) * z.pow(kappa);
  const Complex value = pref * sum;
  return {value, value * (-0.5 + kappa / x) + pref * dsum};
}

Jet w_by_path(Complex kappa, Complex mu, const SectorArg& z) {
  const double r = z.modulus();
  const double theta = z.branch_arg();
  const double r0 = detail::kWhittakerAsymRadius;
  const double theta0 = std::clamp(theta, -kPi / 2, kPi / 2);
  const Jet start = w_asymptotic(kappa, mu, SectorArg(r0, theta0));
  const auto ode = whittaker_ode(kappa, mu);
  std::vector<Complex> nodes;
  if (theta == theta0) {
    nodes = {std::polar(r0, theta0), std::polar(r, theta)};
  } else {
    nodes = detail::ray_arc_ray(r0, theta0, std::min(r, kArcRadius), theta, r);
  }
  return detail::continue_path(ode, nodes, start);
}

}  // namespace

Complex kummer_m(Complex a, Complex b, Complex x) {
  if (b.imag() == 0.0 && b.real() <= 0.0 && b.real() == std::round(b.real()))
    throw Error(ErrorKind::pole, "kummer_m: b is a nonpositive integer");
  const KummerJet k = kummer_jet(a, b, x);
  return {static_cast<double>(k.value.real()), static_cast<double>(k.value.imag())};
}

Jet whittaker_W_jet(Complex kappa, Complex mu, const SectorArg& z) {
  check_branch(z);
  if (z.modulus() == 0.0) throw Error(ErrorKind::domain, "whittaker_W: z = 0");
  if (z.modulus() > 700.0) throw Error(ErrorKind::domain, "whittaker_W: |z| out of range");
  if (z.modulus() >= detail::kWhittakerAsymRadius && std::abs(z.branch_arg()) <= kPi)
    return w_asymptotic(kappa, mu, z);
  return w_by_path(kappa, mu, z);
}

Jet whittaker_M_jet(Complex kappa, Complex mu, const SectorArg& z) {
  check_branch(z);
  check_mu(mu);
  if (z.modulus() > 700.0) throw Error(ErrorKind::domain, "whittaker_M: |z| out of range");
  if (z.modulus() == 0.0) throw Error(ErrorKind::domain, "whittaker_M: derivative undefined at z = 0");
  const double r = z.modulus();
  const double theta = z.branch_arg();
  if (r <= detail::kKummerRadius) return m_series(kappa, mu, z);

  if (std::abs(theta) <= kPi / 2) {
    // M/Gamma(1+2mu) = e^{+-(kappa-mu-1/2) pi i} W_{kappa,mu}(z)/Gamma(1/2+mu+kappa)
    //                + e^{+-kappa pi i} W_{-kappa,mu}(z e^{+-pi i})/Gamma(1/2+mu-kappa)
    const double sign = theta >= 0.0 ? 1.0 : -1.0;
    const Complex g = gamma(1.0 + 2.0 * mu);
    const Jet w1 = whittaker_W_jet(kappa, mu, z);
    const Complex c1 = g * std::exp(sign * (kappa - mu - 0.5) * kPi * kI) * rgamma(0.5 + mu + kappa);
    const Complex g2 = rgamma(0.5 + mu - kappa);
    Jet w2{0.0, 0.0};
    if (g2 != 0.0) w2 = whittaker_W_jet(-kappa, mu, z.rotated(sign * kPi));
    const Complex c2 = g * std::exp(sign * kappa * kPi * kI) * g2;
    // d/dz W(z e^{i pi}) = -W'(.)
    return {c1 * w1.value + c2 * w2.value, c1 * w1.deriv - c2 * w2.deriv};
  }
  const double r0 = detail::kKummerRadius;
  const Jet start = m_series(kappa, mu, SectorArg(r0, theta));
  return detail::continue_segment(whittaker_ode(kappa, mu), std::polar(r0, theta), start, std::polar(r, theta));
}

Complex whittaker_M(Complex kappa, Complex mu, const SectorArg& z) {
  if (z.modulus() == 0.0) {
    check_mu(mu);
    if (mu.real() + 0.5 > 0.0) return 0.0;
    throw Error(ErrorKind::domain, "whittaker_M: z = 0 with Re(mu) <= -1/2");
  }
  return whittaker_M_jet(kappa, mu, z).value;
}
Complex whittaker_W(Complex kappa, Complex mu, const SectorArg& z) { return whittaker_W_jet(kappa, mu, z).value; }

}  // namespace pv5

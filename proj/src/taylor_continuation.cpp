#include "taylor_continuation.hpp"

#include <algorithm>
#include <cmath>

#include "pv5/errors.hpp"

namespace pv5::detail {
namespace {

using LComplex = std::complex<long double>;

LComplex widen(Complex z) { return {z.real(), z.imag()}; }
Complex narrow(LComplex z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

// Coefficients of the polynomial re-expanded about z0.
struct Shifted {
  LComplex k0, k1, k2;
};

Shifted shift(const QuadPoly& poly, LComplex z0) {
  const LComplex c0 = widen(poly.c0), c1 = widen(poly.c1), c2 = widen(poly.c2);
  return {c0 + c1 * z0 + c2 * z0 * z0, c1 + 2.0L * c2 * z0, c2};
}

Jet taylor_step(const LinearOde2& ode, LComplex z0, LComplex w, LComplex dw, LComplex h) {
  const Shifted p = shift(ode.p, z0);
  const Shifted q = shift(ode.q, z0);
  const Shifted r = shift(ode.r, z0);
  if (std::abs(p.k0) == 0.0L) throw Error(ErrorKind::domain, "taylor continuation through a singular point");

  // d[n] = c_n h^n for the local expansion w(z0 + s) = sum c_n s^n.
  constexpr int kMaxTerms = 600;
  LComplex dm2 = 0.0L, dm1 = 0.0L;  // d[n-2], d[n-1]
  LComplex dn = w;                  // d[n]
  LComplex dn1 = dw * h;            // d[n+1]
  LComplex sum = dn + dn1;
  LComplex dsum = dn1;  // sum n d_n
  const long double scale = std::max(std::abs(w), std::abs(dw * h));
  int small_run = 0;
  const LComplex h2 = h * h, h3 = h2 * h, h4 = h3 * h;
  for (int n = 0; n < kMaxTerms; ++n) {
    const long double nn = n;
    const LComplex num = (p.k1 * nn * (nn + 1.0L) + q.k0 * (nn + 1.0L)) * h * dn1 +
                         (p.k2 * nn * (nn - 1.0L) + q.k1 * nn + r.k0) * h2 * dn +
                         (q.k2 * (nn - 1.0L) + r.k1) * h3 * dm1 + r.k2 * h4 * dm2;
    const LComplex dn2 = -num / (p.k0 * (nn + 2.0L) * (nn + 1.0L));
    sum += dn2;
    dsum += (nn + 2.0L) * dn2;
    const long double mag = std::abs(dn2) * (nn + 3.0L);
    const long double ref = std::max(scale, std::abs(sum)) + std::abs(dsum);
    small_run = (mag <= 1e-19L * ref) ? small_run + 1 : 0;
    if (small_run >= 3 && n > 4) break;
    dm2 = dm1;
    dm1 = dn;
    dn = dn1;
    dn1 = dn2;
  }
  return {narrow(sum), narrow(dsum / h)};
}

}  // namespace

Jet continue_segment(const LinearOde2& ode, Complex z0, Jet w0, Complex z1, double max_step) {
  LComplex z = widen(z0);
  const LComplex target = widen(z1);
  LComplex w = widen(w0.value), dw = widen(w0.deriv);
  int guard = 0;
  while (std::abs(target - z) > 0.0L) {
    const long double remaining = std::abs(target - z);
    const long double cap = std::min<long double>(0.4L * std::abs(z), max_step);
    if (cap <= 1e-300L) throw Error(ErrorKind::domain, "taylor continuation reached the origin");
    LComplex h = target - z;
    if (remaining > cap) h *= cap / remaining;
    const Jet next = taylor_step(ode, z, w, dw, h);
    w = widen(next.value);
    dw = widen(next.deriv);
    z = (remaining > cap) ? z + h : target;
    if (++guard > 1000000) throw Error(ErrorKind::tolerance_failure, "taylor continuation did not terminate");
  }
  return {narrow(w), narrow(dw)};
}

Jet continue_path(const LinearOde2& ode, const std::vector<Complex>& nodes, Jet w0, double max_step) {
  Jet w = w0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) w = continue_segment(ode, nodes[i], w, nodes[i + 1], max_step);
  return w;
}

std::vector<Complex> ray_arc_ray(double rho0, double th0, double rho1, double th1, double rho2) {
  std::vector<Complex> nodes{std::polar(rho0, th0)};
  if (rho1 != rho0) nodes.push_back(std::polar(rho1, th0));
  const double sweep = th1 - th0;
  const int pieces = static_cast<int>(std::ceil(std::abs(sweep) / 0.2));
  for (int k = 1; k <= pieces; ++k) nodes.push_back(std::polar(rho1, th0 + sweep * k / pieces));
  if (rho2 != rho1) nodes.push_back(std::polar(rho2, th1));
  return nodes;
}

}  // namespace pv5::detail

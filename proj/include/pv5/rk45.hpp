#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "pv5/complex.hpp"

namespace pv5 {

template <std::size_t N>
using CVec = std::array<Complex, N>;

struct StepTolerance {
  double rtol = 1e-12;
  double atol = 1e-14;
};

// Dormand-Prince 5(4) with FSAL and a PI step-size controller, for complex
// state vectors evolving in a real parameter s. Error norm is the max over
// components of |err_i| / (atol + rtol * max(|y_i|, |y_new_i|)).
template <std::size_t N>
class DormandPrince {
 public:
  using Vec = CVec<N>;

  explicit DormandPrince(StepTolerance tol) : tol_(tol) {}

  // Attempts one step of size h from (s, y) with k1 = f(s, y). On acceptance
  // y_out holds the new state, k_out = f(s + h, y_out), and true is returned.
  // h_next is always updated.
  template <class F>
  bool step(F&& f, double s, const Vec& y, const Vec& k1, double h, Vec& y_out, Vec& k_out, double& h_next) {
    Vec k2, k3, k4, k5, k6, tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a21 * k1[i]);
    k2 = f(s + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(s + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(s + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(s + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(s + h, tmp);
    Vec y_new;
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    Vec k7 = f(s + h, y_new);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const Complex e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = tol_.atol + tol_.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double r = std::abs(e) / sc;
      if (!std::isfinite(r) || !is_finite(y_new[i])) finite = false;
      err = std::max(err, r);
    }
    if (!finite) {
      h_next = 0.25 * h;
      return false;
    }
    last_error_ = err;
    if (err <= 1.0) {
      const double prev = std::max(err_prev_, 1e-4);
      double factor = err == 0.0 ? kMaxGrow : kSafety * std::pow(err, -0.7 / 5.0) * std::pow(prev, 0.4 / 5.0);
      factor = std::clamp(factor, kMinShrink, kMaxGrow);
      if (rejected_) factor = std::min(factor, 1.0);
      h_next = h * factor;
      err_prev_ = err;
      rejected_ = false;
      y_out = y_new;
      k_out = k7;
      return true;
    }
    h_next = h * std::max(kMinShrink, kSafety * std::pow(err, -1.0 / 5.0));
    rejected_ = true;
    return false;
  }

  double last_error() const { return last_error_; }
  const StepTolerance& tolerance() const { return tol_; }

 private:
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double kSafety = 0.9, kMinShrink = 0.2, kMaxGrow = 5.0;

  StepTolerance tol_;
  double err_prev_ = 1e-4;
  double last_error_ = 0.0;
  bool rejected_ = false;
};

// Initial step guess from the size of the derivative.
template <std::size_t N>
double initial_step(const CVec<N>& y, const CVec<N>& dy, const StepTolerance& tol, double span) {
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = tol.atol + tol.rtol * std::abs(y[i]);
    d0 = std::max(d0, std::abs(y[i]) / sc);
    d1 = std::max(d1, std::abs(dy[i]) / sc);
  }
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::min(h, std::abs(span));
}

// Integrates y' = f(s, y) from s0 to s1 (either direction) and returns y(s1).
// Throws via on_fail(s, reason) if the step size collapses or max_steps is hit.
template <std::size_t N, class F, class Fail>
CVec<N> integrate_fixed_end(F&& f, double s0, double s1, CVec<N> y, StepTolerance tol, Fail&& on_fail,
                            long max_steps = 5'000'000) {
  if (s0 == s1) return y;
  DormandPrince<N> dp(tol);
  const double dir = s1 > s0 ? 1.0 : -1.0;
  double s = s0;
  CVec<N> k = f(s, y);
  double h = dir * initial_step(y, k, tol, s1 - s0);
  CVec<N> y_new, k_new;
  for (long steps = 0; steps < max_steps; ++steps) {
    const bool last = dir * (s + h - s1) >= 0.0;
    const double hh = last ? s1 - s : h;
    double h_next = hh;
    if (dp.step(f, s, y, k, hh, y_new, k_new, h_next)) {
      s = last ? s1 : s + hh;
      y = y_new;
      k = k_new;
      if (last) return y;
    }
    h = h_next;
    if (std::abs(h) <= 1e-14 * std::max(1.0, std::abs(s))) on_fail(s, "step size underflow");
  }
  on_fail(s, "maximum step count exceeded");
  return y;
}

}  // namespace pv5

#include <array>
#include <cmath>

#include "pv5/errors.hpp"
#include "pv5/specialfn.hpp"

namespace pv5 {
namespace {

bool is_pole(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::round(z.real());
}

// sin(pi z) with the integer part of Re z removed exactly.
Complex sin_pi(Complex z) {
  const double n = std::round(z.real());
  const Complex f{z.real() - n, z.imag()};
  const Complex s = std::sin(kPi * f);
  return (static_cast<long long>(n) % 2 == 0) ? s : -s;
}

// B_{2k} / (2k (2k-1)), k = 1..12
constexpr std::array<double, 12> kStirling = {
    1.0 / 12.0,           -1.0 / 360.0,          1.0 / 1260.0,          -1.0 / 1680.0,
    1.0 / 1188.0,         -691.0 / 360360.0,     1.0 / 156.0,           -3617.0 / 122400.0,
    43867.0 / 244188.0,   -174611.0 / 125400.0,  77683.0 / 5796.0,      -236364091.0 / 1506960.0,
};

Complex stirling(Complex w) {
  const Complex inv = 1.0 / w;
  const Complex inv2 = inv * inv;
  Complex series = 0.0;
  Complex power = inv;
  for (double coeff : kStirling) {
    series += coeff * power;
    power *= inv2;
  }
  return (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * kPi) + series;
}

// log Gamma for Re z >= 0.5 via upward recurrence to Re >= 15.
Complex log_gamma_right(Complex z) {
  Complex w = z;
  Complex log_product = 0.0;
  while (w.real() < 15.0) {
    log_product += std::log(w);
    w += 1.0;
  }
  return stirling(w) - log_product;
}

}  // namespace

Complex log_gamma(Complex z) {
  if (is_pole(z)) throw Error(ErrorKind::pole, "log_gamma: pole at nonpositive integer");
  if (z.real() >= 0.5) return log_gamma_right(z);
  return std::log(kPi) - std::log(sin_pi(z)) - log_gamma_right(1.0 - z);
}

Complex gamma(Complex z) {
  if (is_pole(z)) throw Error(ErrorKind::pole, "gamma: pole at nonpositive integer");
  if (z.real() >= 0.5) return std::exp(log_gamma_right(z));
  return kPi / (sin_pi(z) * std::exp(log_gamma_right(1.0 - z)));
}

Complex rgamma(Complex z) {
  if (is_pole(z)) return 0.0;
  if (z.real() >= 0.5) return std::exp(-log_gamma_right(z));
  return sin_pi(z) * std::exp(log_gamma_right(1.0 - z)) / kPi;
}

}  // namespace pv5

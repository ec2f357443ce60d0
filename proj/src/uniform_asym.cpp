#include "pv5/uniform_asym.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "pv5/errors.hpp"
#include "pv5/rk45.hpp"

namespace pv5 {
namespace {

PoleSum operator+(const PoleSum& x, const PoleSum& y) { return {x.c + y.c, x.r0 + y.r0, x.r1 + y.r1, x.p0, x.p1}; }
PoleSum operator-(const PoleSum& x, const PoleSum& y) { return {x.c - y.c, x.r0 - y.r0, x.r1 - y.r1, x.p0, x.p1}; }
PoleSum operator*(Complex k, const PoleSum& x) { return {k * x.c, k * x.r0, k * x.r1, x.p0, x.p1}; }

bool on_cut(Complex a, Complex b, bool right_cut) {
  // does segment a-b meet [1/2, inf) (right_cut) or (-inf, -1/2] on the real axis?
  auto hits = [&](double x) { return right_cut ? x >= 0.5 - 1e-12 : x <= -0.5 + 1e-12; };
  if (a.imag() == 0.0 && hits(a.real())) return true;
  if (b.imag() == 0.0 && hits(b.real())) return true;
  if ((a.imag() > 0.0) == (b.imag() > 0.0) || a.imag() == b.imag()) return false;
  const double s = a.imag() / (a.imag() - b.imag());
  return hits(a.real() + s * (b.real() - a.real()));
}

double segment_distance(Complex a, Complex b, Complex p) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  double s = len2 == 0.0 ? 0.0 : std::real(std::conj(d) * (p - a)) / len2;
  s = std::clamp(s, 0.0, 1.0);
  return std::abs(a + s * d - p);
}

// Continuous argument along a sequence of points, starting from the principal value.
std::vector<double> unwrap_args(const std::vector<Complex>& pts) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == 0) {
      out.push_back(std::arg(pts[0]));
      continue;
    }
    out.push_back(out.back() + std::arg(pts[i] / pts[i - 1]));
  }
  return out;
}

}  // namespace

const char* to_string(ScalarVariant v) {
  switch (v) {
    case ScalarVariant::direct: return "direct";
    case ScalarVariant::tilde: return "tilde";
    case ScalarVariant::hat: return "hat";
  }
  return "unknown";
}

Complex PoleSum::value(Complex eta) const { return c + r0 / (eta - p0) + r1 / (eta - p1); }
Complex PoleSum::d1(Complex eta) const {
  const Complex x0 = eta - p0, x1 = eta - p1;
  return -r0 / (x0 * x0) - r1 / (x1 * x1);
}
Complex PoleSum::d2(Complex eta) const {
  const Complex x0 = eta - p0, x1 = eta - p1;
  return 2.0 * r0 / (x0 * x0 * x0) + 2.0 * r1 / (x1 * x1 * x1);
}

ScalarODECoeffs::ScalarODECoeffs(ScalarVariant variant, const PVState& s) : variant_(variant), state_(s) {
  validate(s);
  const double t = s.t;
  const Complex y = s.y, v = s.v;
  const Complex u = s.u();
  alpha_ = variant == ScalarVariant::direct ? whittaker_alpha(s) : Complex(0.0);
  // Entries of the λ-system as c + r0/(λ-0) + r1/(λ-1), then moved to η.
  const PoleSum a{t / 2.0, v, -v, 0.0, 1.0};
  switch (variant) {
    case ScalarVariant::direct: {
      // η = λt: entries divided by t, poles at η = 0 and η = t, residues unchanged.
      a_ = {0.5, v, -v, 0.0, t};
      b_ = {0.0, -u * v, u * y * v, 0.0, t};
      c_ = {0.0, v / u, -v / (u * y), 0.0, t};
      break;
    }
    case ScalarVariant::tilde: {
      const PoleSum bb{0.0, -v, v * y, 0.0, 1.0};
      const PoleSum cb{0.0, v, -v / y, 0.0, 1.0};
      a_ = a + bb;
      b_ = bb;
      c_ = cb - bb - 2.0 * a;
      break;
    }
    case ScalarVariant::hat: {
      const PoleSum bw{0.0, v / y, -v, 0.0, 1.0};
      const PoleSum cw{0.0, -v * y, v, 0.0, 1.0};
      a_ = a - bw;
      b_ = bw;
      c_ = 2.0 * a + cw - bw;
      break;
    }
  }
  if (variant != ScalarVariant::direct) {
    // η = λ - 1/2
    for (PoleSum* p : {&a_, &b_, &c_}) {
      p->p0 = -0.5;
      p->p1 = 0.5;
    }
  }
  if (c_.c == 0.0 && c_.r0 == 0.0 && c_.r1 == 0.0)
    throw Error(ErrorKind::c_zero, "scalar_reduce: C vanishes identically");
}

std::vector<Complex> ScalarODECoeffs::singular_points() const { return {c_.p0, c_.p1}; }

Complex ScalarODECoeffs::F(Complex eta) const {
  for (Complex p : singular_points())
    if (eta == p) throw Error(ErrorKind::domain, "scalar equation evaluated at a pole");
  const Complex a = a_.value(eta), b = b_.value(eta), c = c_.value(eta);
  if (c == 0.0) throw Error(ErrorKind::c_zero, "scalar equation: C(η) = 0");
  const Complex q = c_.d1(eta) / c;
  return a * a + b * c - a_.d1(eta) + a * q + 0.75 * q * q - 0.5 * c_.d2(eta) / c;
}

Complex ScalarODECoeffs::model(Complex eta) const {
  if (variant_ == ScalarVariant::direct)
    return 0.25 - 0.5 / eta + (alpha_ * alpha_ / 4.0 - 0.25) / (eta * eta);
  const double t = state_.t;
  return t * t * eta * eta / (4.0 * (eta * eta - 0.25)) + 0.75 / (eta * eta);
}

ScalarODECoeffs scalar_reduce(ScalarVariant variant, const PVState& s) { return ScalarODECoeffs(variant, s); }

WhittakerCoefficients whittaker_model_coeffs(const PVState& s, double t) {
  const Complex alpha = whittaker_alpha(s);
  if (alpha.imag() == 0.0 && alpha.real() < 0.0 && alpha.real() == std::round(alpha.real()))
    throw Error(ErrorKind::pole, "whittaker_model_coeffs: α is a negative integer");
  const Complex beta2 = s.v * (1.0 - 1.0 / s.y) / s.u();
  if (!is_finite(beta2)) throw Error(ErrorKind::branch, "whittaker_model_coeffs: β undefined");
  // β is fixed up to sign; take Re β > 0, or Im β >= 0 when β² is (numerically) negative real
  Complex beta = std::sqrt(beta2);
  if (std::abs(beta.real()) <= 1e-12 * std::abs(beta) ? beta.imag() < 0.0 : beta.real() < 0.0) beta = -beta;
  const Complex g = gamma(1.0 + alpha);
  return {beta * g * rgamma(alpha / 2.0) / t, beta * g * rgamma(1.0 + alpha / 2.0) * std::exp(-alpha * kPi * kI / 2.0),
          beta, alpha, beta};
}

LargeTCoefficients large_t_coeffs(double t) {
  const double sp = std::sqrt(kPi);
  const Complex d1 = kI * sp * std::exp(t / 4.0);
  const Complex d2 = kI / sp * std::exp(-t / 4.0);
  const Complex d3 = std::exp(t / 4.0) / sp;
  LargeTCoefficients c{d1, d2, d3, d1, -2.0 * kPi * kI * d2, d2, d3, 0.0};
  c.M = c.e1 * c.e3 + c.e2 * c.e4;
  return c;
}

Complex s1_small_t(Complex sigma, Complex r) {
  if (r == 0.0) throw Error(ErrorKind::domain, "s1_small_t: r = 0");
  return -(2.0 * kI / r) * std::sin(sigma * kPi / 2.0);
}
Complex s2_small_t(Complex sigma, Complex r) {
  if (r == 0.0) throw Error(ErrorKind::domain, "s2_small_t: r = 0");
  return -2.0 * kI * r * std::sin(sigma * kPi / 2.0);
}
Complex s1_large_t(Complex u_hat) {
  if (u_hat == 0.0) throw Error(ErrorKind::domain, "s1_large_t: u_hat = 0");
  return 2.0 * kI / u_hat;
}
Complex s2_large_t(Complex u_hat) {
  if (u_hat == 0.0) throw Error(ErrorKind::domain, "s2_large_t: u_hat = 0");
  return -2.0 * kI * u_hat;
}

ConnectionResult connection_from_multipliers(Complex s1, Complex s2) {
  // sin²(πσ/2) = -s1 s2 / 4, r = s2 / (-2i sin(πσ/2))
  const Complex w = std::sqrt(-s1 * s2 / 4.0);
  if (w == 0.0) throw Error(ErrorKind::no_solution, "connection: s1 s2 = 0 has no solution with r finite");
  const Complex base = (2.0 / kPi) * std::asin(w);
  std::vector<Complex> candidates;
  for (int k = -2; k <= 2; ++k)
    for (Complex c : {base, -base, 2.0 - base, base - 2.0}) candidates.push_back(c + 4.0 * k);
  std::vector<Complex> in_strip;
  for (Complex c : candidates) {
    if (c.real() >= -1e-14 && c.real() < 1.0 - 1e-14) {
      const Complex cc(std::max(0.0, c.real()), c.imag());
      bool dup = false;
      for (Complex e : in_strip) dup = dup || std::abs(e - cc) < 1e-12;
      if (!dup) in_strip.push_back(cc);
    }
  }
  if (in_strip.empty()) throw Error(ErrorKind::no_solution, "connection: no σ on the strip 0 <= Re σ < 1");
  std::stable_sort(in_strip.begin(), in_strip.end(), [](Complex a, Complex b) {
    if ((a.imag() >= 0.0) != (b.imag() >= 0.0)) return a.imag() >= 0.0;
    return std::abs(a) < std::abs(b);
  });
  auto r_of = [&](Complex sigma) { return s2 / (-2.0 * kI * std::sin(sigma * kPi / 2.0)); };
  ConnectionResult res{in_strip[0], r_of(in_strip[0]), in_strip[0], r_of(in_strip[0])};
  if (in_strip.size() > 1) {
    res.mirror_sigma = in_strip[1];
    res.mirror_r = r_of(in_strip[1]);
  }
  return res;
}

ConnectionResult connection_solve(Complex u_hat) {
  if (u_hat == 0.0) throw Error(ErrorKind::domain, "connection_solve: u_hat = 0");
  const Complex sigma = kI / kPi * std::log(3.0 + std::sqrt(8.0));
  return {sigma, -kI * u_hat, -sigma, kI * u_hat};
}

ConnectionResidual connection_check(Complex sigma, Complex r, Complex u_hat) {
  return {s1_small_t(sigma, r) - s1_large_t(u_hat), s2_small_t(sigma, r) - s2_large_t(u_hat)};
}

Jet bessel_model_solution(ModelBranch which, const SectorArg& eta, double t) {
  const Complex e = eta.value();
  if (eta.modulus() == 0.0 || std::abs(e * e - 0.25) <= 1e-14)
    throw Error(ErrorKind::domain, "bessel_model_solution: η at a turning point or pole");
  const Complex root = std::sqrt(1.0 - 0.25 / (e * e));
  const SectorArg s_arg(eta.modulus() * std::abs(root), eta.branch_arg() + std::arg(root));
  const Complex S = s_arg.value();
  const SectorArg z = s_arg.scaled(t / 2.0);
  const Jet f = which == ModelBranch::plus ? bessel_K1_jet(z) : bessel_I1_jet(z.value());
  const Complex pre = eta.pow(-0.5);  // η^{-1/2}
  const Complex dS = e / S;
  const Complex value = pre * S * f.value;
  const Complex deriv = -0.5 / e * value + pre * dS * f.value + pre * S * f.deriv * (t / 2.0) * dS;
  return {value, deriv};
}

Jet whittaker_model_solution(ModelBranch which, const SectorArg& eta, Complex alpha) {
  return which == ModelBranch::plus ? whittaker_M_jet(0.5, alpha / 2.0, eta) : whittaker_W_jet(0.5, alpha / 2.0, eta);
}

std::vector<Complex> eta_ray(double theta, double r0, double r1) { return {std::polar(r0, theta), std::polar(r1, theta)}; }

ApproximantReport approximant_error(ScalarVariant variant, const PVState& s, const std::vector<Complex>& ray,
                                    const ApproximantOptions& opts) {
  if (ray.size() < 2) throw Error(ErrorKind::domain, "approximant_error: ray needs two nodes");
  if (opts.samples < 3) throw Error(ErrorKind::domain, "approximant_error: need at least 3 samples");
  const ScalarODECoeffs sc(variant, s);
  const double t = s.t;
  for (std::size_t i = 0; i + 1 < ray.size(); ++i) {
    if (variant == ScalarVariant::tilde && on_cut(ray[i], ray[i + 1], true))
      throw Error(ErrorKind::domain, "approximant_error: tilde ray meets [1/2, inf)");
    if (variant == ScalarVariant::hat && on_cut(ray[i], ray[i + 1], false))
      throw Error(ErrorKind::domain, "approximant_error: hat ray meets (-inf, -1/2]");
    for (Complex p : {Complex(0.0), sc.singular_points()[0], sc.singular_points()[1]})
      if (segment_distance(ray[i], ray[i + 1], p) < 1e-6)
        throw Error(ErrorKind::domain, "approximant_error: ray passes through a singular point");
  }

  // Sample points at equal arc length, plus the polyline nodes as stations.
  std::vector<double> cum{0.0};
  for (std::size_t i = 0; i + 1 < ray.size(); ++i) cum.push_back(cum.back() + std::abs(ray[i + 1] - ray[i]));
  const double total = cum.back();
  auto point_at = [&](double arc) {
    std::size_t i = std::upper_bound(cum.begin(), cum.end(), arc) - cum.begin();
    i = std::clamp<std::size_t>(i, 1, ray.size() - 1);
    const double f = (arc - cum[i - 1]) / (cum[i] - cum[i - 1]);
    return ray[i - 1] + f * (ray[i] - ray[i - 1]);
  };
  struct Station {
    double arc;
    int sample;  // -1 for a polyline node
  };
  std::vector<Station> stations;
  for (int k = 0; k < opts.samples; ++k) stations.push_back({total * k / (opts.samples - 1), k});
  for (std::size_t i = 1; i + 1 < cum.size(); ++i) stations.push_back({cum[i], -1});
  std::sort(stations.begin(), stations.end(), [](const Station& a, const Station& b) { return a.arc < b.arc; });

  std::vector<Complex> eta(opts.samples);
  for (int k = 0; k < opts.samples; ++k) eta[k] = point_at(total * k / (opts.samples - 1));
  // branch of η continued from the principal argument of the first point
  std::vector<Complex> dense;
  for (const Station& st : stations) dense.push_back(point_at(st.arc));
  const std::vector<double> args = unwrap_args(dense);
  std::vector<double> eta_arg(opts.samples);
  for (std::size_t j = 0; j < stations.size(); ++j)
    if (stations[j].sample >= 0) eta_arg[stations[j].sample] = args[j];

  std::vector<Jet> plus(opts.samples), minus(opts.samples);
  for (int k = 0; k < opts.samples; ++k) {
    const SectorArg e(std::abs(eta[k]), eta_arg[k]);
    if (variant == ScalarVariant::direct) {
      plus[k] = whittaker_model_solution(ModelBranch::plus, e, sc.alpha());
      minus[k] = whittaker_model_solution(ModelBranch::minus, e, sc.alpha());
    } else {
      plus[k] = bessel_model_solution(ModelBranch::plus, e, t);
      minus[k] = bessel_model_solution(ModelBranch::minus, e, t);
    }
  }

  CVec<2> phi{opts.start_plus * plus[0].value + opts.start_minus * minus[0].value,
              opts.start_plus * plus[0].deriv + opts.start_minus * minus[0].deriv};
  std::vector<Complex> numeric(opts.samples);
  numeric[0] = phi[0];
  const StepTolerance tol{opts.rtol, opts.atol};
  for (std::size_t j = 1; j < stations.size(); ++j) {
    const Complex a = point_at(stations[j - 1].arc), b = point_at(stations[j].arc);
    if (a != b) {
      const Complex d = b - a;
      auto rhs = [&](double u, const CVec<2>& x) -> CVec<2> {
        const Complex e = a + u * d;
        const Complex f = opts.exact_model ? sc.model(e) : sc.F(e);
        return {d * x[1], d * f * x[0]};
      };
      phi = integrate_fixed_end<2>(rhs, 0.0, 1.0, phi, tol, [](double, const char* why) {
        throw Error(ErrorKind::tolerance_failure, std::string("approximant_error: ") + why);
      });
    }
    if (stations[j].sample >= 0) numeric[stations[j].sample] = phi[0];
  }

  Eigen::MatrixX2cd A(opts.samples, 2);
  Eigen::VectorXcd rhs(opts.samples);
  for (int k = 0; k < opts.samples; ++k) {
    const double w = std::abs(plus[k].value) + std::abs(minus[k].value);
    A(k, 0) = plus[k].value / w;
    A(k, 1) = minus[k].value / w;
    rhs(k) = numeric[k] / w;
  }
  const Eigen::Vector2cd coef = A.colPivHouseholderQr().solve(rhs);
  ApproximantReport rep;
  rep.c1 = coef(0);
  rep.c2 = coef(1);
  for (int k = 0; k < opts.samples; ++k) {
    const Complex m = rep.c1 * plus[k].value + rep.c2 * minus[k].value;
    const double scale = std::abs(rep.c1 * plus[k].value) + std::abs(rep.c2 * minus[k].value);
    const double err = std::abs(numeric[k] - m) / scale;
    rep.samples.push_back({eta[k], numeric[k], m, err});
    rep.max_rel_error = std::max(rep.max_rel_error, err);
  }
  return rep;
}

}  // namespace pv5

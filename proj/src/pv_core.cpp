#include "pv5/pv_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "pv5/errors.hpp"
#include "pv5/rk45.hpp"
#include "pv5/specialfn.hpp"

namespace pv5 {
namespace {

// Formal large-t solution in powers of s = 1/t:
// y = -1 + sum kY[k] s^k, v = -t/8 + sum kV[k] s^k, ln u = ln u_hat + t/2 + sum kL[k] s^k.
constexpr std::array<double, 15> kY = {0.0,        -4.0,          -8.0,          0.0,
                                       32.0,       -320.0,        -1536.0,       35840.0,
                                       156160.0,   -7252992.0,    -30361600.0,   2371747840.0,
                                       9747529728.0, -1150673944576.0, -4684850659328.0};
constexpr std::array<double, 15> kV = {0.0, 0.0, 0.0, 2.0,         0.0, -160.0,         0.0, 25152.0,
                                       0.0, -6732800.0, 0.0, 2765032960.0, 0.0, -1620404502528.0, 0.0};
constexpr std::array<double, 15> kL = {0.0,
                                       -2.0,
                                       0.0,
                                       16.0 / 3.0,
                                       0.0,
                                       -992.0 / 5.0,
                                       0.0,
                                       136960.0 / 7.0,
                                       0.0,
                                       -34102784.0 / 9.0,
                                       0.0,
                                       13386563584.0 / 11.0,
                                       0.0,
                                       -7607910563840.0 / 13.0,
                                       0.0};

// Highest order at which the y-series terms are still decreasing (compared
// with the term two orders lower, since odd and even terms alternate in size).
int series_order(double t, int max_order) {
  int order = 2;
  for (int k = 3; k <= std::min<int>(max_order, 14); ++k) {
    const double cur = std::abs(kY[k]) * std::pow(t, -k);
    const double prev = std::abs(kY[k - 2]) * std::pow(t, -(k - 2));
    if (cur > prev) break;
    order = k;
  }
  return order;
}

double series_sum(const std::array<double, 15>& c, double t, int order) {
  double sum = 0.0;
  for (int k = order; k >= 1; --k) sum = (sum + c[k]) / t;
  return sum;
}

using Chart = CVec<3>;  // {s or p, v, ell}, ell = ln(u y^{1/2})

Chart root_chart_rhs(double t, const Chart& x) {
  const Complex s = x[0], v = x[1];
  const Complex s2 = s * s;
  const Complex w = s2 - 1.0;
  return {0.5 * s - v * w * w / (t * s), v * v * (s2 - 1.0 / s2) / t, 0.5};
}

Chart inverse_chart_rhs(double t, const Chart& x) {
  const Complex p = x[0], v = x[1];
  const Complex p2 = p * p;
  const Complex w = 1.0 - p2;
  return {-0.5 * p + v * w * w / (t * p), v * v * (1.0 / p2 - p2) / t, 0.5};
}

constexpr double kSwitchModulus = 2.0;

struct ChartPoint {
  bool inverse;
  Chart x;
};

ChartPoint to_chart(const PVState& s) {
  const Complex root = s.y_root;
  const Complex ell = s.ln_u + std::log(root);
  if (std::abs(root) > kSwitchModulus) return {true, {1.0 / root, s.v, ell}};
  return {false, {root, s.v, ell}};
}

PVState from_chart(double t, const ChartPoint& c) {
  PVState s;
  s.t = t;
  s.y_root = c.inverse ? 1.0 / c.x[0] : c.x[0];
  s.y = s.y_root * s.y_root;
  s.v = c.x[1];
  s.ln_u = c.x[2] - std::log(s.y_root);
  return s;
}

std::vector<double> landing_times(double t0, double t1, const IntegrateOptions& opts) {
  std::vector<double> times;
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  if (opts.samples_per_decade > 0) {
    const double n = opts.samples_per_decade;
    const long k_lo = static_cast<long>(std::ceil(std::log10(lo) * n - 1e-9));
    const long k_hi = static_cast<long>(std::floor(std::log10(hi) * n + 1e-9));
    for (long k = k_lo; k <= k_hi; ++k) {
      const double tk = std::pow(10.0, k / n);
      if (tk > lo * (1 + 1e-12) && tk < hi * (1 - 1e-12)) times.push_back(tk);
    }
  }
  for (double te : opts.extra_times)
    if (te > lo * (1 + 1e-12) && te < hi * (1 - 1e-12)) times.push_back(te);
  times.push_back(t1);
  if (t1 < t0)
    std::sort(times.begin(), times.end(), std::greater<>());
  else
    std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(a); }),
              times.end());
  return times;
}

struct MarchResult {
  std::vector<PVState> samples;
  std::vector<ChartSwitch> switches;
  long steps = 0;
};

MarchResult march(const PVState& from, const std::vector<double>& times, const IntegrateOptions& opts) {
  MarchResult out;
  out.samples.push_back(from);
  if (times.empty()) return out;
  ChartPoint cp = to_chart(from);
  double t = from.t;
  const double dir = times.back() < t ? -1.0 : 1.0;
  const StepTolerance tol{opts.rtol, opts.atol};
  DormandPrince<3> dp(tol);
  auto rhs = [&cp](double tt, const Chart& x) { return cp.inverse ? inverse_chart_rhs(tt, x) : root_chart_rhs(tt, x); };
  Chart k = rhs(t, cp.x);
  double h = dir * initial_step(cp.x, k, tol, times.back() - t);
  std::size_t next = 0;
  Chart x_new, k_new;
  while (next < times.size()) {
    if (out.steps >= opts.max_steps) throw Error(ErrorKind::tolerance_failure, "integrate: maximum step count exceeded");
    const double target = times[next];
    const bool lands = dir * (t + h - target) >= 0.0;
    const double hh = lands ? target - t : h;
    double h_next = hh;
    if (dp.step(rhs, t, cp.x, k, hh, x_new, k_new, h_next)) {
      ++out.steps;
      t = lands ? target : t + hh;
      cp.x = x_new;
      k = k_new;
      if (lands) {
        out.samples.push_back(from_chart(t, cp));
        ++next;
        // a landing step is usually clipped; keep the larger proposal
        if (std::abs(h_next) > std::abs(h)) h = h_next;
      } else {
        h = h_next;
      }
      const double m = std::abs(cp.x[0]);
      if (m > kSwitchModulus) {
        cp.x[0] = 1.0 / cp.x[0];
        cp.inverse = !cp.inverse;
        out.switches.push_back({t, cp.inverse});
        k = rhs(t, cp.x);
      }
    } else {
      h = h_next;
    }
    if (std::abs(h) <= 1e-14 * t || !is_finite(cp.x[0]) || !is_finite(cp.x[1])) {
      std::ostringstream msg;
      msg << "integrate: singularity encountered near t = " << t;
      throw SingularityError(t, msg.str());
    }
  }
  return out;
}

}  // namespace

PVState PVState::make(double t, Complex y, Complex v, Complex u) {
  if (u == 0.0) throw Error(ErrorKind::singular_state, "PVState: u = 0");
  return make_log(t, y, v, std::log(u));
}

PVState PVState::make_log(double t, Complex y, Complex v, Complex ln_u) {
  PVState s{t, y, v, ln_u, kI * std::sqrt(-y)};
  return s;
}

void validate(const PVState& s) {
  if (!(s.t > 0.0) || !std::isfinite(s.t)) throw Error(ErrorKind::singular_state, "PVState: t must be positive");
  if (!is_finite(s.y) || !is_finite(s.v) || !is_finite(s.ln_u))
    throw Error(ErrorKind::singular_state, "PVState: non-finite component");
  if (s.y == 0.0 || s.y == 1.0) throw Error(ErrorKind::singular_state, "PVState: y in {0, 1}");
  if (std::exp(s.ln_u.real()) == 0.0) throw Error(ErrorKind::singular_state, "PVState: u = 0");
}

Derivatives system_rhs(const PVState& s) {
  validate(s);
  const Complex y = s.y, v = s.v;
  const double t = s.t;
  const Complex ym1 = y - 1.0;
  return {y - 2.0 * v * ym1 * ym1 / t, (y * v * v - v * v / y) / t, (-2.0 * v + y * v + v / y) / t};
}

Complex second_derivative(const PVState& s) {
  const Derivatives d = system_rhs(s);
  const Complex y = s.y, v = s.v;
  const double t = s.t;
  const Complex ym1 = y - 1.0;
  return d.dy - (2.0 * d.dv * ym1 * ym1 + 4.0 * v * ym1 * d.dy) / t + 2.0 * v * ym1 * ym1 / (t * t);
}

Complex pv_residual(double t, Complex y, Complex y1, Complex y2) {
  if (!(t > 0.0)) throw Error(ErrorKind::singular_state, "pv_residual: t must be positive");
  if (y == 0.0 || y == 1.0) throw Error(ErrorKind::singular_state, "pv_residual: y in {0, 1}");
  const Complex bracket =
      (1.0 / (2.0 * y) + 1.0 / (y - 1.0)) * y1 * y1 - y1 / t + y / t - y * (y + 1.0) / (2.0 * (y - 1.0));
  return y2 - bracket;
}

Complex seed_s_squared(Complex sigma) {
  if (sigma == 0.0) throw Error(ErrorKind::pole, "seed_s_squared: sigma = 0");
  const Complex ratio = gamma(-sigma) / gamma(sigma);
  const Complex g3 = gamma(0.5 * sigma);
  const Complex g6 = g3 * g3 * g3 * g3 * g3 * g3;
  return kI * sigma * sigma / (4.0 * kPi * kPi * kPi) * ratio * ratio * g6;
}

SeedZero SeedZero::make(Complex sigma, Complex r) {
  if (!(sigma.real() >= 0.0 && sigma.real() < 1.0))
    throw Error(ErrorKind::domain, "SeedZero: requires 0 <= Re sigma < 1");
  if (r == 0.0) throw Error(ErrorKind::domain, "SeedZero: r = 0");
  return {sigma, r, seed_s_squared(sigma)};
}

PVState seed_at_zero(double t, const SeedZero& seed) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "seed_at_zero: t must be positive");
  const Complex tp = std::exp(seed.sigma * std::log(t));
  const Complex w = seed.sigma * seed.s_squared * tp;
  const double scale = 1e-14 * std::max(1.0, std::abs(w));
  if (std::abs(w - 2.0) <= scale || std::abs(w + 2.0) <= scale || std::abs(w) == 0.0)
    throw Error(ErrorKind::degenerate_seed, "seed_at_zero: sigma s^2 t^sigma = +-2");
  PVState s;
  s.t = t;
  s.y_root = (2.0 - w) / (2.0 + w);
  s.y = s.y_root * s.y_root;
  s.v = 1.0 / (4.0 * seed.s_squared * tp) - seed.sigma * seed.sigma * seed.s_squared * tp / 16.0;
  s.ln_u = std::log(-seed.r * (2.0 + w) / (2.0 - w));
  return s;
}

PVState seed_at_infinity(double t, const SeedInf& seed, double t_floor) {
  if (t < t_floor) throw Error(ErrorKind::domain, "seed_at_infinity: t below the configured floor");
  if (seed.u_hat == 0.0) throw Error(ErrorKind::domain, "seed_at_infinity: u_hat = 0");
  return PVState::make_log(t, -1.0 - 4.0 / t, -t / 8.0, std::log(seed.u_hat) + t / 2.0);
}

PVState seed_at_infinity_series(double t, const SeedInf& seed, double t_floor, int max_order) {
  if (t < t_floor) throw Error(ErrorKind::domain, "seed_at_infinity_series: t below the configured floor");
  if (seed.u_hat == 0.0) throw Error(ErrorKind::domain, "seed_at_infinity_series: u_hat = 0");
  const int order = series_order(t, max_order);
  const Complex y = -1.0 + series_sum(kY, t, order);
  const Complex v = -t / 8.0 + series_sum(kV, t, order);
  const Complex ln_u = std::log(seed.u_hat) + t / 2.0 + series_sum(kL, t, order);
  return PVState::make_log(t, y, v, ln_u);
}

Trajectory integrate(const PVState& from, double t_target, const IntegrateOptions& opts) {
  validate(from);
  if (!(t_target > 0.0)) throw Error(ErrorKind::domain, "integrate: t_target must be positive");
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) throw Error(ErrorKind::domain, "integrate: tolerances must be positive");
  std::vector<double> times;
  if (std::abs(t_target - from.t) > 1e-15 * from.t) times = landing_times(from.t, t_target, opts);
  MarchResult m = march(from, times, opts);
  Trajectory traj(std::move(m.samples), opts.rtol, opts.atol, "state");
  traj.set_chart_switches(std::move(m.switches));
  traj.set_steps(m.steps);
  return traj;
}

Trajectory integrate(const PVState& from, double t_target, double rtol, double atol) {
  IntegrateOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  return integrate(from, t_target, opts);
}

PVState Trajectory::state_at(double t) const {
  if (samples_.empty()) throw Error(ErrorKind::domain, "Trajectory: empty");
  const auto nearest = std::min_element(samples_.begin(), samples_.end(), [t](const PVState& a, const PVState& b) {
    return std::abs(a.t - t) < std::abs(b.t - t);
  });
  if (std::abs(nearest->t - t) <= 1e-12 * t) return *nearest;
  IntegrateOptions opts;
  opts.rtol = rtol_;
  opts.atol = atol_;
  opts.samples_per_decade = 0;
  return march(*nearest, {t}, opts).samples.back();
}

Complex extract_sigma(const PVState& s) {
  if (s.y_root == 0.0) throw Error(ErrorKind::branch, "extract_sigma: y = 0, branch of y^{1/2} undefined");
  return 2.0 * s.v * (1.0 - s.y) / s.y_root;
}

Complex extract_r(const PVState& s) {
  if (s.y_root == 0.0) throw Error(ErrorKind::branch, "extract_r: y = 0, branch of y^{1/2} undefined");
  return -s.u() * s.y_root;
}

Complex whittaker_alpha(const PVState& s) {
  const Complex a0 = extract_sigma(s);
  const Complex root = std::sqrt(a0 * a0 - 4.0 * s.v * s.t);
  return std::abs(root - a0) <= std::abs(root + a0) ? root : -root;
}

Complex extract_u_hat(const PVState& s) {
  const int order = series_order(s.t, 14);
  return std::exp(s.ln_u - s.t / 2.0 - series_sum(kL, s.t, order));
}

Complex sine_gordon_q(const PVState& s, std::optional<Complex> q_ref) {
  const Complex root = s.y_root;
  if (std::abs(root - 1.0) <= 1e-12 || std::abs(root + 1.0) <= 1e-12)
    throw Error(ErrorKind::branch, "sine_gordon_q: y = 1, q undefined");
  Complex q = -kI * std::log((root + 1.0) / (root - 1.0));
  if (q_ref) {
    const double k = std::round((q_ref->real() - q.real()) / (2.0 * kPi));
    q += 2.0 * kPi * k;
  }
  return q;
}

SineGordonReport sine_gordon_residual(const Trajectory& traj, double t_lo, double t_hi, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::domain, "sine_gordon_residual: h must be positive");
  IntegrateOptions local;
  local.rtol = std::min(traj.rtol(), 1e-13);
  local.atol = 1e-16;
  local.samples_per_decade = 0;
  const double dt = 4.0 * h;  // t = 4x
  SineGordonReport rep;
  for (const PVState& c : traj.samples()) {
    if (c.t - dt < t_lo || c.t + dt > t_hi) continue;
    const PVState lo = march(c, {c.t - dt}, local).samples.back();
    const PVState hi = march(c, {c.t + dt}, local).samples.back();
    const Complex q0 = sine_gordon_q(c);
    const Complex qm = sine_gordon_q(lo, q0);
    const Complex qp = sine_gordon_q(hi, q0);
    const double x = c.t / 4.0;
    const Complex q1 = (qp - qm) / (2.0 * h);
    const Complex q2 = (qp - 2.0 * q0 + qm) / (h * h);
    const double r = std::abs(x * q2 - 2.0 * x * std::sin(2.0 * q0) + q1 + 2.0 * std::sin(q0));
    ++rep.points;
    if (r > rep.max_residual) {
      rep.max_residual = r;
      rep.t_at_max = c.t;
    }
  }
  return rep;
}

double sine_gordon_residual(const Trajectory& traj) {
  double lo = traj.front().t, hi = traj.back().t;
  if (lo > hi) std::swap(lo, hi);
  return sine_gordon_residual(traj, lo, hi, 1e-3).max_residual;
}

}  // namespace pv5

#include "pv5/lax.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "pv5/errors.hpp"
#include "pv5/rk45.hpp"

namespace pv5 {
namespace {

constexpr double kExclusionRadius = 0.05;

void check_lambda(Complex lambda) {
  if (lambda == 0.0 || lambda == 1.0) throw Error(ErrorKind::domain, "lax: λ at a regular singular point");
}

Mat2 sigma3() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

double segment_distance(Complex a, Complex b, Complex p) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  double s = len2 == 0.0 ? 0.0 : std::real(std::conj(d) * (p - a)) / len2;
  s = std::clamp(s, 0.0, 1.0);
  return std::abs(a + s * d - p);
}

CVec<4> pack(const Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }
Mat2 unpack(const CVec<4>& x) {
  Mat2 m;
  m << x[0], x[1], x[2], x[3];
  return m;
}

double relative_spread(const std::vector<Complex>& values) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double scale = std::max(std::abs(values[i]), std::abs(values[j]));
      if (scale > 0.0) worst = std::max(worst, std::abs(values[i] - values[j]) / scale);
    }
  return worst;
}

}  // namespace

Mat2 LaxCoefficients::matrix() const {
  Mat2 m;
  m << a, b, c, -a;
  return m;
}

const char* to_string(Gauge g) {
  switch (g) {
    case Gauge::original: return "original";
    case Gauge::tilde: return "tilde";
    case Gauge::hat: return "hat";
  }
  return "unknown";
}

LaxSystem::LaxSystem(const PVState& s, Gauge g) : state_(s), gauge_(g) {
  const Complex u = s.u(), y = s.y, v = s.v;
  if (u == 0.0) throw Error(ErrorKind::singular_state, "lax: u = 0");
  a0_ << v, -u * v, v / u, -v;
  a1_ << -v, u * y * v, -v / (u * y), v;
  const Complex half_u = std::exp(0.5 * s.ln_u);
  Mat2 lower, diag;
  switch (g) {
    case Gauge::original:
      g_ = Mat2::Identity();
      break;
    case Gauge::tilde:
      lower << 1.0, 0.0, -1.0, 1.0;
      diag << 1.0 / half_u, 0.0, 0.0, half_u;
      g_ = lower * diag;
      break;
    case Gauge::hat: {
      if (y == 0.0 || s.y_root == 0.0) throw Error(ErrorKind::branch, "gauge_hat: (-uy)^{1/2} undefined");
      const Complex root = kI * half_u * s.y_root;  // (-u y)^{1/2}
      lower << 1.0, 0.0, 1.0, 1.0;
      diag << 1.0 / root, 0.0, 0.0, root;
      g_ = lower * diag;
      break;
    }
  }
  g_inv_ = g_.inverse();
}

LaxCoefficients LaxSystem::operator()(Complex lambda) const {
  check_lambda(lambda);
  const double t = state_.t;
  const Complex y = state_.y, v = state_.v;
  const Complex l0 = 1.0 / lambda, l1 = 1.0 / (lambda - 1.0);
  const Complex a = t / 2.0 + v * l0 - v * l1;
  switch (gauge_) {
    case Gauge::original: {
      const Complex u = state_.u();
      return {a, -u * v * l0 + u * y * v * l1, v / u * l0 - v / (u * y) * l1};
    }
    case Gauge::tilde: {
      const Complex bb = -v * l0 + v * y * l1;
      const Complex cb = v * l0 - v / y * l1;
      return {a + bb, bb, cb - bb - 2.0 * a};
    }
    case Gauge::hat: {
      const Complex bw = v / y * l0 - v * l1;   // b / (-u y)
      const Complex cw = -v * y * l0 + v * l1;  // c (-u y)
      return {a - bw, bw, 2.0 * a + cw - bw};
    }
  }
  return {};
}

LaxCoefficients lax_matrix(Complex lambda, const PVState& s) { return LaxSystem(s, Gauge::original)(lambda); }
LaxSystem gauge_tilde(const PVState& s) { return LaxSystem(s, Gauge::tilde); }
LaxSystem gauge_hat(const PVState& s) { return LaxSystem(s, Gauge::hat); }

Mat2 t_matrix(Complex lambda, const PVState& s) {
  const Complex u = s.u(), y = s.y, v = s.v;
  Mat2 m = (lambda / 2.0) * sigma3();
  m(0, 1) += u * v * (y - 1.0) / s.t;
  m(1, 0) += (v / u) * (1.0 - 1.0 / y) / s.t;
  return m;
}

double zero_curvature_residual(const PVState& s, Complex lambda) {
  return zero_curvature_residual(s, lambda, system_rhs(s));
}

double zero_curvature_residual(const PVState& s, Complex lambda, const Derivatives& d) {
  check_lambda(lambda);
  validate(s);
  const Complex u = s.u(), y = s.y, v = s.v;
  const Complex du = u * d.dlnu, dy = d.dy, dv = d.dv;
  const Complex l0 = 1.0 / lambda, l1 = 1.0 / (lambda - 1.0);
  const Complex da = 0.5 + dv * l0 - dv * l1;
  const Complex db = -(du * v + u * dv) * l0 + (du * y * v + u * dy * v + u * y * dv) * l1;
  const Complex uy = u * y;
  const Complex dc = (dv / u - v * du / (u * u)) * l0 - (dv / uy - v * (du * y + u * dy) / (uy * uy)) * l1;
  Mat2 dt_m;
  dt_m << da, db, dc, -da;
  const Mat2 m = lax_matrix(lambda, s).matrix();
  const Mat2 mt = t_matrix(lambda, s);
  const Mat2 res = dt_m - 0.5 * sigma3() + (m * mt - mt * m);
  return res.norm();
}

void Contour::validate() const {
  if (nodes.size() < 2) throw Error(ErrorKind::domain, "contour: needs at least two nodes");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (segment_distance(nodes[i], nodes[i + 1], 0.0) < kExclusionRadius ||
        segment_distance(nodes[i], nodes[i + 1], 1.0) < kExclusionRadius)
      throw Error(ErrorKind::domain, "contour: segment enters the exclusion disc around λ = 0 or 1");
  }
}

std::vector<Mat2> formal_coefficients(const PVState& s, int order) {
  const LaxSystem sys(s, Gauge::original);
  const double t = s.t;
  // M = (t/2)σ₃ + Σ N_j λ^{-j}: N_1 = A0 + A1, N_j = A1 (j >= 2).
  const Mat2 n1 = sys.a0() + sys.a1();
  const Mat2& na = sys.a1();
  auto n = [&](int j) -> const Mat2& { return j == 1 ? n1 : na; };
  std::vector<Mat2> m{Mat2::Identity()};
  m.reserve(order + 1);
  for (int k = 0; k < order; ++k) {
    Mat2 r = -static_cast<double>(k) * m[k];
    for (int j = 1; j <= k + 1; ++j) r -= n(j) * m[k + 1 - j];
    Mat2 next = Mat2::Zero();
    next(0, 1) = r(0, 1) / t;
    next(1, 0) = -r(1, 0) / t;
    m.push_back(next);
    // N_1 is off-diagonal, so the diagonal of m_{k+1} only needs its off-diagonal part here.
    Mat2 sum = Mat2::Zero();
    for (int j = 1; j <= k + 2; ++j) sum += n(j) * m[k + 2 - j];
    m[k + 1](0, 0) = -sum(0, 0) / static_cast<double>(k + 1);
    m[k + 1](1, 1) = -sum(1, 1) / static_cast<double>(k + 1);
  }
  return m;
}

double sector_center(int sector) { return -kPi / 2.0 + kPi * (sector - 1); }

CanonicalFrame canonical_frame(const LaxSystem& sys, int sector, double R, const FrameOptions& opts) {
  if (sector < 1 || sector > 3) throw Error(ErrorKind::domain, "canonical_frame: sector must be 1, 2 or 3");
  if (!(R > 1.0 + kExclusionRadius)) throw Error(ErrorKind::radius_too_small, "canonical_frame: R too small");
  const double theta = sector_center(sector);
  const Complex lambda = std::polar(R, theta);
  const std::vector<Mat2> m = formal_coefficients(sys.state(), opts.max_terms);
  Mat2 sum = Mat2::Identity();
  Complex power = 1.0;
  double last = std::numeric_limits<double>::infinity();
  double estimate = 0.0;
  bool stopped = false;
  for (int k = 1; k < static_cast<int>(m.size()); ++k) {
    power /= lambda;
    const Mat2 term = m[k] * power;
    const double mag = term.cwiseAbs().maxCoeff();
    if (mag > last && k > 2) {
      estimate = last;
      stopped = true;
      break;
    }
    sum += term;
    last = mag;
    if (mag == 0.0) {
      stopped = true;
      break;
    }
  }
  if (!stopped) estimate = last;
  if (estimate > opts.tolerance)
    throw Error(ErrorKind::radius_too_small, "canonical_frame: formal-series remainder above tolerance; increase R");
  return {lambda, sys.gauge_matrix() * sum, sector, theta, estimate, 0.0};
}

CanonicalFrame canonical_frame(const PVState& s, int sector, double R) {
  return canonical_frame(LaxSystem(s, Gauge::original), sector, R);
}

CanonicalFrame propagate(const CanonicalFrame& frame, const Contour& contour, const LaxSystem& sys,
                         const PropagateOptions& opts) {
  contour.validate();
  if (std::abs(contour.nodes.front() - frame.lambda) > 1e-12 * std::max(1.0, std::abs(frame.lambda)))
    throw Error(ErrorKind::domain, "propagate: contour does not start at the frame point");
  const double half_t = sys.t() / 2.0;
  const Mat2 s3 = sigma3();
  CVec<4> x = pack(frame.Yhat);
  const Complex det0 = frame.Yhat.determinant();
  double theta = frame.branch_arg;
  for (std::size_t i = 0; i + 1 < contour.nodes.size(); ++i) {
    const Complex a = contour.nodes[i], b = contour.nodes[i + 1];
    const Complex d = b - a;
    auto rhs = [&](double s, const CVec<4>& st) {
      const Mat2 y = unpack(st);
      const Mat2 dy = (sys.matrix(a + s * d) * y - half_t * (y * s3)) * d;
      return pack(dy);
    };
    x = integrate_fixed_end<4>(rhs, 0.0, 1.0, x, StepTolerance{opts.rtol, opts.atol}, [](double s, const char* why) {
      throw Error(ErrorKind::overflow, std::string("propagate: ") + why + " at segment parameter " + std::to_string(s));
    });
    for (const Complex& e : x)
      if (!is_finite(e)) throw Error(ErrorKind::overflow, "propagate: non-finite frame");
    // continuous argument along the segment (segments avoid the origin)
    double step = std::arg(b / a);
    theta += step;
  }
  CanonicalFrame out = frame;
  out.lambda = contour.nodes.back();
  out.Yhat = unpack(x);
  out.branch_arg = theta;
  out.det_drift = frame.det_drift + std::abs(out.Yhat.determinant() - det0);
  return out;
}

CanonicalFrame propagate(const CanonicalFrame& frame, const Contour& contour, const PVState& s) {
  return propagate(frame, contour, LaxSystem(s, Gauge::original));
}

double r_min(double t) { return std::max(50.0, 200.0 / t); }

StokesData stokes_multipliers(const PVState& s, double R, const StokesOptions& opts) {
  validate(s);
  const LaxSystem sys(s, opts.gauge);
  const double t = s.t;
  const CanonicalFrame y1 = canonical_frame(sys, 1, R, opts.frame);
  const CanonicalFrame y2 = canonical_frame(sys, 2, R, opts.frame);
  const CanonicalFrame y3 = canonical_frame(sys, 3, R, opts.frame);
  const Complex lo = y1.lambda, hi = y2.lambda;
  const double c = opts.strip_right, cl = opts.strip_left;
  const Contour right{{lo, Complex(c, -R), Complex(c, R), hi}, 1};
  const Contour left{{hi, Complex(-cl, R), Complex(-cl, -R), lo}, 2};

  auto f1 = std::async(std::launch::async, [&] { return propagate(y1, right, sys, opts.propagate); });
  const CanonicalFrame y2_moved = propagate(y2, left, sys, opts.propagate);
  const CanonicalFrame y1_moved = f1.get();

  // S = E^{-1} Ŷa^{-1} Ŷb E at the matching point, E = diag(e^{λt/2}, e^{-λt/2}).
  auto stokes_matrix = [t](const Mat2& ya, const Mat2& yb, Complex lambda) {
    Mat2 x = ya.inverse() * yb;
    x(0, 1) *= std::exp(-lambda * t);
    x(1, 0) *= std::exp(lambda * t);
    return x;
  };
  StokesData out;
  out.S1 = stokes_matrix(y1_moved.Yhat, y2.Yhat, hi);
  out.S2 = stokes_matrix(y2_moved.Yhat, y3.Yhat, lo);
  out.s1 = out.S1(1, 0);
  out.s2 = out.S2(0, 1);
  out.t_used = t;
  out.R = R;
  out.gauge = opts.gauge;
  out.ray_angles = {y1.branch_arg, y2.branch_arg, y3.branch_arg};
  out.structure_residual_s1 =
      std::max({std::abs(out.S1(0, 0) - 1.0), std::abs(out.S1(1, 1) - 1.0), std::abs(out.S1(0, 1))});
  out.structure_residual_s2 =
      std::max({std::abs(out.S2(0, 0) - 1.0), std::abs(out.S2(1, 1) - 1.0), std::abs(out.S2(1, 0))});
  out.det_drift = std::max(y1_moved.det_drift, y2_moved.det_drift);
  out.truncation_estimate = std::max({y1.truncation_estimate, y2.truncation_estimate, y3.truncation_estimate});
  if (out.structure_residual_s1 > opts.structure_tolerance || out.structure_residual_s2 > opts.structure_tolerance)
    throw Error(ErrorKind::structure_violation,
                "stokes_multipliers: Stokes matrices are not unit triangular within tolerance; increase R");
  return out;
}

IsomonodromyReport isomonodromy_scan(const Trajectory& traj, const std::vector<double>& t_points, double R,
                                     const StokesOptions& opts) {
  std::vector<std::future<StokesData>> jobs;
  jobs.reserve(t_points.size());
  for (double tp : t_points) {
    jobs.push_back(std::async(std::launch::async, [&traj, tp, R, &opts] {
      const PVState s = traj.state_at(tp);
      return stokes_multipliers(s, R > 0.0 ? R : r_min(tp), opts);
    }));
  }
  IsomonodromyReport rep;
  std::vector<Complex> s1, s2;
  for (auto& j : jobs) {
    rep.data.push_back(j.get());
    s1.push_back(rep.data.back().s1);
    s2.push_back(rep.data.back().s2);
  }
  rep.max_dev_s1 = relative_spread(s1);
  rep.max_dev_s2 = relative_spread(s2);
  return rep;
}

}  // namespace pv5

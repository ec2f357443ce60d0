#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pv5/complex.hpp"

namespace pv5 {

// Unknowns of the nonlinear system at time t. ln_u is carried instead of u so
// that e^{t/2} growth never overflows; y_root is the branch of y^{1/2}
// continued along the trajectory (+i at y = -1 on the large-t end).
struct PVState {
  double t = 0.0;
  Complex y;
  Complex v;
  Complex ln_u;
  Complex y_root;

  Complex u() const { return std::exp(ln_u); }

  // y_root defaults to i*sqrt(-y) with the principal square root.
  static PVState make(double t, Complex y, Complex v, Complex u);
  static PVState make_log(double t, Complex y, Complex v, Complex ln_u);
};

// Throws Error(singular_state) unless t > 0, y not in {0, 1}, u != 0 and all finite.
void validate(const PVState& s);

struct Derivatives {
  Complex dy, dv, dlnu;
};

Derivatives system_rhs(const PVState& s);

// y'' implied by the system (t-derivative of the first equation).
Complex second_derivative(const PVState& s);

Complex pv_residual(double t, Complex y, Complex y1, Complex y2);

struct SeedZero {
  Complex sigma;
  Complex r;
  Complex s_squared;

  // Fills s_squared from seed_s_squared(sigma); enforces 0 <= Re sigma < 1, r != 0.
  static SeedZero make(Complex sigma, Complex r);
};

struct SeedInf {
  Complex u_hat;
};

Complex seed_s_squared(Complex sigma);

PVState seed_at_zero(double t, const SeedZero& seed);

// Leading-order large-t data: y = -1 - 4/t, v = -t/8, u = u_hat e^{t/2}.
PVState seed_at_infinity(double t, const SeedInf& seed, double t_floor = 20.0);

// Formal 1/t expansion of the same solution, summed to its smallest term.
PVState seed_at_infinity_series(double t, const SeedInf& seed, double t_floor = 20.0, int max_order = 14);

struct IntegrateOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  std::vector<double> extra_times;
  int samples_per_decade = 64;
  long max_steps = 5'000'000;
};

// A chart switch of the internal representation (diagnostic).
struct ChartSwitch {
  double t;
  bool to_inverse;
};

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<PVState> samples, double rtol, double atol, std::string seed_descriptor)
      : samples_(std::move(samples)), rtol_(rtol), atol_(atol), seed_(std::move(seed_descriptor)) {}

  const std::vector<PVState>& samples() const { return samples_; }
  double rtol() const { return rtol_; }
  double atol() const { return atol_; }
  const std::string& seed_descriptor() const { return seed_; }
  void set_seed_descriptor(std::string s) { seed_ = std::move(s); }
  const std::vector<ChartSwitch>& chart_switches() const { return switches_; }
  void set_chart_switches(std::vector<ChartSwitch> s) { switches_ = std::move(s); }
  long steps() const { return steps_; }
  void set_steps(long n) { steps_ = n; }

  const PVState& front() const { return samples_.front(); }
  const PVState& back() const { return samples_.back(); }

  // Exact sample if t is one (to 1e-12 relative), otherwise a short integration
  // from the closest sample at the trajectory's tolerances.
  PVState state_at(double t) const;

 private:
  std::vector<PVState> samples_;
  double rtol_ = 0.0, atol_ = 0.0;
  std::string seed_;
  std::vector<ChartSwitch> switches_;
  long steps_ = 0;
};

Trajectory integrate(const PVState& from, double t_target, const IntegrateOptions& opts = {});
Trajectory integrate(const PVState& from, double t_target, double rtol, double atol);

// Leading-order small-t quantities, on the continued branch of y^{1/2}.
Complex extract_sigma(const PVState& s);  // 2v(1-y)/y^{1/2}
Complex extract_r(const PVState& s);      // -u y^{1/2}
// alpha(t) with alpha^2/4 = v^2(1-y)^2/y - v t, sign nearest extract_sigma.
Complex whittaker_alpha(const PVState& s);
// Large-t constant: u e^{-t/2} corrected by the 1/t series of ln u.
Complex extract_u_hat(const PVState& s);

// Sine-Gordon form of the equation in x = t/4 with q from y = ((e^{iq}+1)/(e^{iq}-1))^2.
struct SineGordonReport {
  double max_residual = 0.0;
  double t_at_max = 0.0;
  int points = 0;
};
SineGordonReport sine_gordon_residual(const Trajectory& traj, double t_lo, double t_hi, double h);
double sine_gordon_residual(const Trajectory& traj);

// q on the branch continuous with q_ref (for the sine-Gordon reduction).
Complex sine_gordon_q(const PVState& s, std::optional<Complex> q_ref = std::nullopt);

}  // namespace pv5

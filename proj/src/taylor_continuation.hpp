#pragma once

#include <vector>

#include "pv5/complex.hpp"
#include "pv5/specialfn.hpp"

namespace pv5::detail {

// c0 + c1 z + c2 z^2
struct QuadPoly {
  Complex c0, c1, c2;
};

// p(z) w'' + q(z) w' + r(z) w = 0 with polynomial coefficients of degree <= 2.
struct LinearOde2 {
  QuadPoly p, q, r;
};

// Continues (w, w') analytically along the straight segment z0 -> z1 by
// re-expanding the ODE in Taylor series. Step length is capped by a fraction of
// the distance to the origin (the only finite singular point of the equations
// used here) and by max_step.
Jet continue_segment(const LinearOde2& ode, Complex z0, Jet w0, Complex z1, double max_step = 2.0);

// Runs continue_segment across a polyline.
Jet continue_path(const LinearOde2& ode, const std::vector<Complex>& nodes, Jet w0,
                  double max_step = 2.0);

// Polyline from rho0*e^{i th0} radially to rho1, then along the circle to th1,
// then radially to rho2. Arc chords subtend at most 0.2 rad.
std::vector<Complex> ray_arc_ray(double rho0, double th0, double rho1, double th1, double rho2);

}  // namespace pv5::detail

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "pv5/complex.hpp"
#include "pv5/pv_core.hpp"

namespace pv5 {

using Mat2 = Eigen::Matrix2cd;

// Trace-free coefficient matrix [[a, b], [c, -a]].
struct LaxCoefficients {
  Complex a, b, c;
  Mat2 matrix() const;
};

enum class Gauge { original, tilde, hat };
const char* to_string(Gauge g);

// dY/dλ = M(λ) Y in the chosen gauge; Y_gauge = G Y_original with G = gauge_matrix().
class LaxSystem {
 public:
  LaxSystem(const PVState& s, Gauge g);

  LaxCoefficients operator()(Complex lambda) const;
  Mat2 matrix(Complex lambda) const { return (*this)(lambda).matrix(); }

  const Mat2& gauge_matrix() const { return g_; }
  // Residues of the original system at λ = 0 and λ = 1.
  const Mat2& a0() const { return a0_; }
  const Mat2& a1() const { return a1_; }
  Gauge gauge() const { return gauge_; }
  double t() const { return state_.t; }
  const PVState& state() const { return state_; }

 private:
  PVState state_;
  Gauge gauge_;
  Mat2 a0_, a1_, g_, g_inv_;
};

LaxCoefficients lax_matrix(Complex lambda, const PVState& s);
LaxSystem gauge_tilde(const PVState& s);
LaxSystem gauge_hat(const PVState& s);

// Coefficient of the t-equation dY/dt = M_t Y compatible with the λ-equation.
Mat2 t_matrix(Complex lambda, const PVState& s);
double zero_curvature_residual(const PVState& s, Complex lambda);
double zero_curvature_residual(const PVState& s, Complex lambda, const Derivatives& d);

struct Contour {
  std::vector<Complex> nodes;
  int sector = 1;
  // Throws Error(domain) if a segment passes within 0.05 of λ = 0 or 1.
  void validate() const;
};

struct CanonicalFrame {
  Complex lambda;
  Mat2 Yhat;  // Y exp(-λ t σ₃ / 2)
  int sector = 1;
  double branch_arg = 0.0;  // argument of lambda on the sector's sheet
  double truncation_estimate = 0.0;
  double det_drift = 0.0;  // accumulated by propagate
};

// Coefficients m_k of Ŷ ~ I + Σ m_k λ^{-k} in the original gauge, k = 0..order.
std::vector<Mat2> formal_coefficients(const PVState& s, int order);

struct FrameOptions {
  double tolerance = 1e-8;
  int max_terms = 40;
};

// Central ray of Ω^{(k)}: arg λ = -π/2 + π (k - 1).
double sector_center(int sector);
CanonicalFrame canonical_frame(const LaxSystem& sys, int sector, double R, const FrameOptions& opts = {});
CanonicalFrame canonical_frame(const PVState& s, int sector, double R);

struct PropagateOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
};

CanonicalFrame propagate(const CanonicalFrame& frame, const Contour& contour, const LaxSystem& sys,
                         const PropagateOptions& opts = {});
CanonicalFrame propagate(const CanonicalFrame& frame, const Contour& contour, const PVState& s);

double r_min(double t);

struct StokesOptions {
  Gauge gauge = Gauge::original;
  double strip_right = 2.0;  // Re λ of the contour joining Y1 to Y2
  double strip_left = 1.0;   // -Re λ of the contour joining Y2 to Y3
  double structure_tolerance = 1e-6;
  FrameOptions frame;
  PropagateOptions propagate;
};

struct StokesData {
  Complex s1, s2;
  double t_used = 0.0;
  double R = 0.0;
  Mat2 S1, S2;
  std::array<double, 3> ray_angles{};  // initialization rays of Y1, Y2, Y3
  double structure_residual_s1 = 0.0;
  double structure_residual_s2 = 0.0;
  double det_drift = 0.0;
  double truncation_estimate = 0.0;
  Gauge gauge = Gauge::original;
};

StokesData stokes_multipliers(const PVState& s, double R, const StokesOptions& opts = {});

struct IsomonodromyReport {
  std::vector<StokesData> data;
  double max_dev_s1 = 0.0;
  double max_dev_s2 = 0.0;
};

// R <= 0 selects r_min(t) at each point. Points are processed concurrently.
IsomonodromyReport isomonodromy_scan(const Trajectory& traj, const std::vector<double>& t_points, double R,
                                     const StokesOptions& opts = {});

}  // namespace pv5

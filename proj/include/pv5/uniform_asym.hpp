#pragma once

#include <optional>
#include <vector>

#include "pv5/complex.hpp"
#include "pv5/lax.hpp"
#include "pv5/pv_core.hpp"
#include "pv5/specialfn.hpp"

namespace pv5 {

// Which second-order scalar equation: small-t scaling η = λt, or the two
// gauge-transformed large-t equations in η = λ - 1/2.
enum class ScalarVariant { direct, tilde, hat };
const char* to_string(ScalarVariant v);

// c + r0/(η - p0) + r1/(η - p1)
struct PoleSum {
  Complex c, r0, r1, p0, p1;
  Complex value(Complex eta) const;
  Complex d1(Complex eta) const;
  Complex d2(Complex eta) const;
};

class ScalarODECoeffs {
 public:
  ScalarODECoeffs(ScalarVariant variant, const PVState& s);

  // φ'' = F(η) φ for φ = C^{-1/2} Y₂.
  Complex F(Complex eta) const;
  Complex model(Complex eta) const;
  Complex g(Complex eta) const { return F(eta) - model(eta); }

  const PoleSum& A() const { return a_; }
  const PoleSum& B() const { return b_; }
  const PoleSum& C() const { return c_; }
  ScalarVariant variant() const { return variant_; }
  const PVState& state() const { return state_; }
  double t() const { return state_.t; }
  // α used by the Whittaker model (direct variant).
  Complex alpha() const { return alpha_; }
  // Points the scalar equation is singular at (poles of A, B, C).
  std::vector<Complex> singular_points() const;

 private:
  ScalarVariant variant_;
  PVState state_;
  PoleSum a_, b_, c_;
  Complex alpha_;
};

ScalarODECoeffs scalar_reduce(ScalarVariant variant, const PVState& s);

struct WhittakerCoefficients {
  Complex c1, c2, c3;
  Complex alpha, beta;
};
WhittakerCoefficients whittaker_model_coeffs(const PVState& s, double t);

struct LargeTCoefficients {
  Complex d1, d2, d3, e1, e2, e3, e4, M;
};
LargeTCoefficients large_t_coeffs(double t);

Complex s1_small_t(Complex sigma, Complex r);
Complex s2_small_t(Complex sigma, Complex r);
Complex s1_large_t(Complex u_hat);
Complex s2_large_t(Complex u_hat);

struct ConnectionResult {
  Complex sigma, r;
  Complex mirror_sigma, mirror_r;
};
ConnectionResult connection_solve(Complex u_hat);
// All (σ, r) on the strip 0 <= Re σ < 1 reproducing (s1, s2); principal first.
ConnectionResult connection_from_multipliers(Complex s1, Complex s2);
struct ConnectionResidual {
  Complex s1, s2;
};
ConnectionResidual connection_check(Complex sigma, Complex r, Complex u_hat);

enum class ModelBranch { plus, minus };
// φ₊ = η^{-1/2} S K₁(tS/2), φ₋ = η^{-1/2} S I₁(tS/2) with S = (η² - 1/4)^{1/2}
// continuous off [-1/2, 1/2] and positive for real η > 1/2.
Jet bessel_model_solution(ModelBranch which, const SectorArg& eta, double t);
// ψ₊ = M_{1/2, α/2}(η), ψ₋ = W_{1/2, α/2}(η).
Jet whittaker_model_solution(ModelBranch which, const SectorArg& eta, Complex alpha);

struct ApproximantOptions {
  int samples = 200;
  double rtol = 1e-12;
  double atol = 1e-30;
  // Initial data at the first node as a combination of the model pair.
  Complex start_plus = 1.0;
  Complex start_minus = 1.0;
  // Replace F by the model (g ≡ 0), for calibration.
  bool exact_model = false;
};

struct ApproximantSample {
  Complex eta;
  Complex numeric;
  Complex model;
  double rel_error;
};

struct ApproximantReport {
  double max_rel_error = 0.0;
  Complex c1, c2;
  std::vector<ApproximantSample> samples;
};

// Integrates the scalar equation along the η-polyline and compares with the
// least-squares combination C₁φ₊ + C₂φ₋ of the model pair.
ApproximantReport approximant_error(ScalarVariant variant, const PVState& s, const std::vector<Complex>& ray,
                                    const ApproximantOptions& opts = {});

// Straight η-ray at angle theta from radius r0 to r1.
std::vector<Complex> eta_ray(double theta, double r0, double r1);

}  // namespace pv5

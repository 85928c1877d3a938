#pragma once

#include <complex>
#include <vector>

#include "seqprob/qcore.hpp"
#include "seqprob/seqmeas.hpp"

namespace seqprob::freeform {

using qcore::Complex;
using qcore::Grid;
using qcore::LinearOperator;
using qcore::SampleSet;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

// Si(x) = int_0^x sin(u)/u du, absolute accuracy ~1e-12.
double sine_integral(double x);

// int_0^T sin(u^2) du.
double fresnel_sin(double T);

// ---------------------------------------------------------------------------
// Slit / half-line quadratures (dimensionless time r = t/(m L^2))
// ---------------------------------------------------------------------------

struct AppendixDValues {
  double p_pp;
  double b;
  double ratio;
};

// Quadrature of p_pp = (1/pi) int_0^1 Si(z^2/r) dz and
// b = (r/pi) int_0^1 (1 - cos(z^2/r))/z^2 dz; closed Si/Fresnel reduction for
// very small r where the integrands oscillate too fast.
AppendixDValues appendix_d_quantities(double r);

// Exact reduction via integration by parts (valid for all r > 0):
//   p_pp = (1/pi) [Si(1/r) - 2 sqrt(r) Fs(1/sqrt(r))]
//   b    = (r/pi) (cos(1/r) - 1) + (2 sqrt(r)/pi) Fs(1/sqrt(r))
AppendixDValues appendix_d_reduced(double r);

struct RatioCurve {
  std::vector<double> r;
  std::vector<double> p_pp;
  std::vector<double> b;
  std::vector<double> ratio;
};
RatioCurve ratio_curve(const std::vector<double>& r_values);

// Exact operator-level two-time quantities for the uniform slit
// psi_0 = chi_[-L,L]/sqrt(2L) with half-line samplings at times 0 and t:
//   p(+,0;+,t) = 1/4 + (1/4pi)[int_0^1 Si(z^2/2r) dz + int_0^1 Si(z(2-z)/2r) dz]
//   d((+,+),(-,+)) is purely imaginary by mirror symmetry:
//   Im d = (r/2pi)[int_0^1 sin(s^2/2r)/s^2 ds + int_1^2 sin(s(2-s)/2r)/s^2 ds]
// so the additivity obstruction 2 Re d vanishes identically.
struct SlitTwoTime {
  double p_pp;     // = p_mm by parity
  double p_pm;     // = p_mp = 1/2 - p_pp
  double im_d;     // Im d((+,+),(-,+));  Re d = 0
};
SlitTwoTime slit_two_time_exact(double r);

// ---------------------------------------------------------------------------
// Free-particle sequential POVM matrix elements
// ---------------------------------------------------------------------------

struct FreeParams {
  double mass = 1.0;
  double t = 1.0;
  double delta = 0.1;
  double sigma = 0.0;  // slit width (two-slit setups)
  double L = 0.0;      // slit separation
};

// <x| R^delta(U1,0;U2,t) |x'> by nested quadrature of the double integral.
Complex r2free_element(double x, double xp, const SampleSet& u1,
                       const SampleSet& u2, const FreeParams& p);

// Factorized form: (m/2pi t) * Itrans(U2) * chi^delta_U1(s) * envelope, where
// Itrans = int_{U2} exp(i k (y - s)) dy at k = m(x-x')/t and s = (x+x')/2.
Complex r2free_element_factorized(double x, double xp, const SampleSet& u1,
                                  const SampleSet& u2, const FreeParams& p);

// Gaussian envelope exp(-(m^2 delta^2/t^2 + 1/(4 delta^2)) (x-x')^2 / 2).
double r2free_envelope(double dx, const FreeParams& p);

// ---------------------------------------------------------------------------
// Two-slit marginal p(Omega, 0; U, t) for the two-slit initial state
// ---------------------------------------------------------------------------

// Closed-form pieces of the marginal density after an unresolved first
// measurement of resolution delta and a second unsharp sampling at t.
struct TwoSlitDensity {
  double amplitude;    // common prefactor of the three Gaussian terms
  double env_coeff;    // E: envelope exponent coefficient
  double fringe_freq;  // omega: cos(omega x)
  double visibility;   // interference amplitude relative to envelope overlap
  double interf_amp;   // amplitude multiplying exp(-E x^2) cos(omega x)

  double density(double x, double L) const;
  double envelope_only(double x, double L) const;
};

TwoSlitDensity two_slit_density(const FreeParams& p);

// Marginal over a sample set (full line handled analytically).
double two_slit_marginal(const SampleSet& u, const FreeParams& p);

// Fringe spacing measured from successive interference maxima of the density.
double two_slit_fringe_period(const FreeParams& p);

// ---------------------------------------------------------------------------
// Time-averaged projector (8-node Gauss-Legendre over [t-tau/2, t+tau/2])
// ---------------------------------------------------------------------------
struct TimeAveragedProjector {
  LinearOperator op;
  double spread;  // ||Pi - Pi^2||
};
TimeAveragedProjector time_averaged_projector(const SampleSet& u, double tau,
                                              const LinearOperator& ham,
                                              const Grid& grid);

// ---------------------------------------------------------------------------
// SI-unit uncertainty budget
// ---------------------------------------------------------------------------
struct UncertaintyBudget {
  double pos_err;   // c1 * d / L
  double time_err;  // c2 * hbar L / (m d^2 v_z)
  double c1, c2;
};
UncertaintyBudget uncertainty_budget(double length_si, double trace_width_si,
                                     double v_z_si, double mass_kg,
                                     double c1 = 1.0, double c2 = 1.0);

}  // namespace seqprob::freeform

#include "seqprob/freeform.hpp"

#include <cmath>
#include <stdexcept>

#include "seqprob/quadrature.hpp"

namespace seqprob::freeform {

namespace {

constexpr double kHbarSi = 1.054571817e-34;  // J s

using std::cos;
using std::sin;
using std::sqrt;

}  // namespace

// ------------------------------------------------------ special functions --

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  if (x <= 16.0) {
    // Taylor series in extended precision; terms peak near 2k+1 ~ x.
    long double sum = 0.0L, term = x;
    const long double x2 = static_cast<long double>(x) * x;
    for (int k = 0; k < 120; ++k) {
      const int n = 2 * k + 1;
      sum += term / n;
      term *= -x2 / ((n + 1.0L) * (n + 2.0L));
      if (std::abs(static_cast<double>(term)) < 1e-18 * (1.0 + std::abs(static_cast<double>(sum))))
        break;
    }
    return static_cast<double>(sum);
  }
  if (x < 40.0) {
    // moderate arguments: a handful of oscillations, adaptive quadrature
    return sine_integral(16.0) +
           integrate([](double u) { return std::sin(u) / u; }, 16.0, x, 1e-13);
  }
  // asymptotic auxiliary expansion: Si = pi/2 - f(x) cos x - g(x) sin x
  const double ix2 = 1.0 / (x * x);
  double f = 0.0, g = 0.0, fk = 1.0, gk = 1.0;
  // f ~ (1/x) sum (-1)^k (2k)!/x^{2k}, g ~ (1/x^2) sum (-1)^k (2k+1)!/x^{2k}
  for (int k = 0; k < 9; ++k) {
    f += fk;
    g += gk;
    fk *= -(2.0 * k + 1.0) * (2.0 * k + 2.0) * ix2;
    gk *= -(2.0 * k + 2.0) * (2.0 * k + 3.0) * ix2;
  }
  f /= x;
  g *= ix2;
  return M_PI / 2.0 - f * std::cos(x) - g * std::sin(x);
}

double fresnel_sin(double T) {
  if (T < 0.0) return -fresnel_sin(-T);
  if (T < 10.0)
    return integrate([](double u) { return std::sin(u * u); }, 0.0, T, 1e-13);
  // int_T^inf e^{iu^2} du = e^{iT^2} (i/(2T)) sum_k c_k / T^{2k}, c_k = (i/2)^k (2k-1)!!
  const std::complex<double> i(0.0, 1.0);
  std::complex<double> sum = 0.0, ck = 1.0;
  const double T2 = T * T;
  for (int k = 0; k < 10; ++k) {
    sum += ck;
    ck *= i * (2.0 * k + 1.0) / (2.0 * T2);
  }
  const std::complex<double> tail =
      std::polar(1.0, T2) * (i / (2.0 * T)) * sum;
  const double s_inf = std::sqrt(M_PI / 8.0);
  return s_inf - tail.imag();
}

// ------------------------------------------------- appendix-D quadratures --

AppendixDValues appendix_d_reduced(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("appendix_d: r must be > 0");
  const double sr = std::sqrt(r);
  const double fs = fresnel_sin(1.0 / sr);
  AppendixDValues v;
  v.p_pp = (sine_integral(1.0 / r) - 2.0 * sr * fs) / M_PI;
  v.b = (r / M_PI) * (std::cos(1.0 / r) - 1.0) + (2.0 * sr / M_PI) * fs;
  v.ratio = v.b / v.p_pp;
  return v;
}

AppendixDValues appendix_d_quantities(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("appendix_d: r must be > 0");
  if (r < 0.01) return appendix_d_reduced(r);  // too oscillatory for quadrature
  AppendixDValues v;
  v.p_pp = integrate([r](double z) { return sine_integral(z * z / r); }, 0.0, 1.0,
                     1e-9) /
           M_PI;
  v.b = (r / M_PI) *
        integrate(
            [r](double z) {
              if (z < 1e-8) return z * z / (2.0 * r * r);
              return (1.0 - std::cos(z * z / r)) / (z * z);
            },
            0.0, 1.0, 1e-9);
  v.ratio = v.b / v.p_pp;
  return v;
}

RatioCurve ratio_curve(const std::vector<double>& r_values) {
  RatioCurve c;
  for (double r : r_values) {
    const AppendixDValues v = appendix_d_quantities(r);
    c.r.push_back(r);
    c.p_pp.push_back(v.p_pp);
    c.b.push_back(v.b);
    c.ratio.push_back(v.ratio);
  }
  return c;
}

SlitTwoTime slit_two_time_exact(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("slit_two_time_exact: r must be > 0");
  SlitTwoTime out;
  const double inv2r = 1.0 / (2.0 * r);
  const double corr =
      integrate([&](double z) { return sine_integral(z * z * inv2r); }, 0.0, 1.0,
                1e-11) +
      integrate([&](double z) { return sine_integral(z * (2.0 - z) * inv2r); }, 0.0,
                1.0, 1e-11);
  out.p_pp = 0.25 + corr / (4.0 * M_PI);
  out.p_pm = 0.5 - out.p_pp;
  const double s1 = integrate(
      [&](double s) {
        if (s < 1e-8) return inv2r;  // sin(s^2/2r)/s^2 -> 1/(2r)
        return std::sin(s * s * inv2r) / (s * s);
      },
      0.0, 1.0, 1e-11);
  const double s2 = integrate(
      [&](double s) { return std::sin(s * (2.0 - s) * inv2r) / (s * s); }, 1.0, 2.0,
      1e-11);
  out.im_d = (r / (2.0 * M_PI)) * (s1 + s2);
  return out;
}

// ------------------------------------------------------- R2free elements --

namespace {

Complex transformed_indicator(const SampleSet& u, double k, double shift) {
  // int_{U - shift} e^{i k y} dy
  Complex total = 0.0;
  for (const auto& iv : u.intervals()) {
    const double a = iv.a - shift;
    const double b = iv.b - shift;
    if (!std::isfinite(a) || !std::isfinite(b))
      throw std::invalid_argument("r2free: U2 must be bounded");
    if (std::abs(k) < 1e-12) {
      total += (b - a) + Complex(0.0, 0.5 * k * (b * b - a * a));
    } else {
      const Complex i(0.0, 1.0);
      total += (std::polar(1.0, k * b) - std::polar(1.0, k * a)) / (i * k);
    }
  }
  return total;
}

}  // namespace

double r2free_envelope(double dx, const FreeParams& p) {
  const double c = p.mass * p.mass * p.delta * p.delta / (p.t * p.t) +
                   1.0 / (4.0 * p.delta * p.delta);
  return std::exp(-0.5 * c * dx * dx);
}

Complex r2free_element(double x, double xp, const SampleSet& u1,
                       const SampleSet& u2, const FreeParams& p) {
  const double s = 0.5 * (x + xp);
  const double k = p.mass * (x - xp) / p.t;
  const double pref = p.mass / (std::pow(2.0 * M_PI, 1.5) * p.t * p.delta);
  const double env = r2free_envelope(x - xp, p);
  // product quadrature of the double integral: the x2 factor is oscillatory,
  // the x1 factor a Gaussian restricted to U1
  double inner_re = 0.0, inner_im = 0.0;
  for (const auto& iv : u2.intervals()) {
    if (!std::isfinite(iv.a) || !std::isfinite(iv.b))
      throw std::invalid_argument("r2free_element: U2 must be bounded");
    inner_re += integrate([&](double x2) { return std::cos(k * (x2 - s)); }, iv.a,
                          iv.b, 1e-12);
    inner_im += integrate([&](double x2) { return std::sin(k * (x2 - s)); }, iv.a,
                          iv.b, 1e-12);
  }
  double outer = 0.0;
  for (const auto& iv : u1.intervals()) {
    const double lo = std::max(std::isfinite(iv.a) ? iv.a : s - 10.0 * p.delta,
                               s - 10.0 * p.delta);
    const double hi = std::min(std::isfinite(iv.b) ? iv.b : s + 10.0 * p.delta,
                               s + 10.0 * p.delta);
    if (hi <= lo) continue;
    outer += integrate(
        [&](double x1) {
          return std::exp(-(x1 - s) * (x1 - s) / (2.0 * p.delta * p.delta));
        },
        lo, hi, 1e-13);
  }
  return pref * env * outer * Complex(inner_re, inner_im);
}

Complex r2free_element_factorized(double x, double xp, const SampleSet& u1,
                                  const SampleSet& u2, const FreeParams& p) {
  const double s = 0.5 * (x + xp);
  const double k = p.mass * (x - xp) / p.t;
  const Complex itrans = transformed_indicator(u2, k, s);
  const qcore::SmearedIndicator ind(u1, p.delta);
  const double chi = qcore::smeared_chi(ind, s);
  return (p.mass / (2.0 * M_PI * p.t)) * itrans * chi * r2free_envelope(x - xp, p);
}

// ------------------------------------------------------- two-slit marginal --

TwoSlitDensity two_slit_density(const FreeParams& p) {
  if (!(p.sigma > 0.0) || !(p.L >= 0.0))
    throw std::invalid_argument("two_slit_density: sigma > 0 and L >= 0 required");
  const double a = 1.0 / (4.0 * p.delta * p.delta);
  const double c = 1.0 / (2.0 * p.sigma * p.sigma);
  const double A = a + c;
  const double tau = p.t / p.mass;
  const double D2 = 1.0 + 4.0 * A * A * tau * tau;
  const double X = 4.0 * c * A * tau * tau;
  const double n2 =
      1.0 / (2.0 * p.sigma * std::sqrt(M_PI) * (1.0 + std::exp(-p.L * p.L * c / 2.0)));

  const double e_raw = 2.0 * c / (1.0 + X);
  const double w_raw = 4.0 * tau * p.L * c * c / (1.0 + X);
  const double expo = (a * c / (2.0 * A)) * p.L * p.L +
                      c * c * p.L * p.L / (2.0 * A * D2) +
                      2.0 * a * c * c * tau * tau * p.L * p.L / (D2 * (1.0 + X));
  const double i_raw = std::exp(-expo);
  const double k_raw = n2 / std::sqrt(1.0 + X);

  // second-slot smearing by the Gaussian POVM profile
  const double s2 = 1.0 + 2.0 * e_raw * p.delta * p.delta;
  TwoSlitDensity d;
  d.env_coeff = e_raw / s2;
  d.fringe_freq = w_raw / s2;
  d.amplitude = k_raw / std::sqrt(s2);
  const double att = std::exp(-p.delta * p.delta * w_raw * w_raw / (2.0 * s2));
  d.interf_amp = 2.0 * i_raw * att;
  // visibility: interference over envelope overlap at the midpoint
  d.visibility = i_raw * att * std::exp(d.env_coeff * p.L * p.L / 4.0);
  return d;
}

double TwoSlitDensity::density(double x, double L) const {
  const double e1 = std::exp(-env_coeff * (x - L / 2) * (x - L / 2));
  const double e2 = std::exp(-env_coeff * (x + L / 2) * (x + L / 2));
  const double it = interf_amp * std::exp(-env_coeff * x * x) * std::cos(fringe_freq * x);
  return amplitude * (e1 + e2 + it);
}

double TwoSlitDensity::envelope_only(double x, double L) const {
  const double e1 = std::exp(-env_coeff * (x - L / 2) * (x - L / 2));
  const double e2 = std::exp(-env_coeff * (x + L / 2) * (x + L / 2));
  return amplitude * (e1 + e2);
}

double two_slit_marginal(const SampleSet& u, const FreeParams& p) {
  const TwoSlitDensity d = two_slit_density(p);
  if (u.is_full_line()) {
    const double gauss = std::sqrt(M_PI / d.env_coeff);
    const double fringe =
        std::exp(-d.fringe_freq * d.fringe_freq / (4.0 * d.env_coeff));
    return d.amplitude * gauss * (2.0 + d.interf_amp * fringe);
  }
  double total = 0.0;
  const double span = 12.0 / std::sqrt(d.env_coeff);
  for (const auto& iv : u.intervals()) {
    const double lo = std::isfinite(iv.a) ? iv.a : -p.L / 2 - span;
    const double hi = std::isfinite(iv.b) ? iv.b : p.L / 2 + span;
    if (hi <= lo) continue;
    total += integrate([&](double x) { return d.density(x, p.L); }, lo, hi, 1e-11);
  }
  return total;
}

double two_slit_fringe_period(const FreeParams& p) {
  const TwoSlitDensity d = two_slit_density(p);
  if (d.fringe_freq <= 0.0) return std::numeric_limits<double>::infinity();
  // measured: successive maxima of the oscillatory part of the density
  const double period0 = 2.0 * M_PI / d.fringe_freq;
  const double h = period0 / 400.0;
  std::vector<double> peaks;
  double prev2 = 0.0, prev1 = 0.0;
  for (int i = 0; i < 1200 && peaks.size() < 4; ++i) {
    const double x = i * h;
    const double osc = d.density(x, p.L) - d.envelope_only(x, p.L);
    if (i >= 2 && prev1 > prev2 && prev1 > osc) peaks.push_back(x - h);
    prev2 = prev1;
    prev1 = osc;
  }
  if (peaks.size() < 2) return period0;
  double sum = 0.0;
  for (size_t i = 1; i < peaks.size(); ++i) sum += peaks[i] - peaks[i - 1];
  return sum / (peaks.size() - 1);
}

// ------------------------------------------------- time-averaged projector --

TimeAveragedProjector time_averaged_projector(const SampleSet& u, double tau,
                                              const LinearOperator& ham,
                                              const Grid& grid) {
  if (!(tau >= 0.0)) throw std::invalid_argument("time_averaged_projector: tau >= 0");
  const LinearOperator proj = LinearOperator::projector(grid, u);
  if (tau == 0.0) return {proj, 0.0};
  double xs[8], ws[8];
  gauss_legendre(8, -tau / 2.0, tau / 2.0, xs, ws);
  qcore::Mat m = qcore::Mat::Zero(grid.n(), grid.n());
  for (int i = 0; i < 8; ++i)
    m += (ws[i] / tau) * qcore::heisenberg(proj, ham, xs[i]).matrix();
  LinearOperator op(grid, std::move(m), false);
  op.mutable_flags().hermitian = true;
  op.mutable_flags().positive = true;
  LinearOperator defect(grid, op.matrix() - op.matrix() * op.matrix(), false);
  return {op, defect.operator_norm()};
}

// -------------------------------------------------------- uncertainty budget

UncertaintyBudget uncertainty_budget(double length_si, double trace_width_si,
                                     double v_z_si, double mass_kg, double c1,
                                     double c2) {
  if (!(length_si > 0.0 && trace_width_si > 0.0 && v_z_si > 0.0 && mass_kg > 0.0))
    throw std::invalid_argument("uncertainty_budget: inputs must be positive");
  UncertaintyBudget b;
  b.c1 = c1;
  b.c2 = c2;
  b.pos_err = c1 * trace_width_si / length_si;
  b.time_err = c2 * kHbarSi * length_si /
               (mass_kg * trace_width_si * trace_width_si * v_z_si);
  return b;
}

}  // namespace seqprob::freeform

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>

namespace seqprob {

// Adaptive Gauss-Kronrod (G7,K15) on [a,b].
namespace detail {

struct GK15 {
  // Kronrod nodes (positive half) and weights; Gauss-7 weights interleaved.
  static constexpr double xk[8] = {
      0.0,
      0.2077849550078985,
      0.4058451513773972,
      0.5860872354676911,
      0.7415311855993945,
      0.8648644233597691,
      0.9491079123427585,
      0.9914553711208126};
  static constexpr double wk[8] = {
      0.2094821410847278,
      0.2044329400752989,
      0.1903505780647854,
      0.1690047266392679,
      0.1406532597155259,
      0.1047900103222502,
      0.0630920926299786,
      0.0229353220105292};
  static constexpr double wg[4] = {
      0.4179591836734694,
      0.3818300505051189,
      0.2797053914892767,
      0.1294849661688697};
};

template <class F>
inline void gk15(const F& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double resk = GK15::wk[0] * f0;
  double resg = GK15::wg[0] * f0;
  for (int j = 1; j < 8; ++j) {
    const double x = h * GK15::xk[j];
    const double fv = f(c - x) + f(c + x);
    resk += GK15::wk[j] * fv;
    if (j % 2 == 0) resg += GK15::wg[j / 2] * fv;
  }
  result = resk * h;
  err = std::abs((resk - resg) * h);
}

}  // namespace detail

// Integrates f over [a,b] to absolute tolerance tol (with a mild relative floor).
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-10,
                 int max_depth = 50) {
  struct Seg {
    double a, b, val, err;
    int depth;
  };
  double v0, e0;
  detail::gk15(f, a, b, v0, e0);
  if (e0 <= tol) return v0;

  // explicit stack based bisection
  static thread_local Seg stack[4096];
  int top = 0;
  stack[top++] = {a, b, v0, e0, 0};
  double total = 0.0;
  double budget = tol;
  while (top > 0) {
    Seg s = stack[--top];
    if (s.err <= budget * (s.b - s.a) / (b - a) + 1e-300 ||
        s.depth >= max_depth) {
      total += s.val;
      continue;
    }
    const double m = 0.5 * (s.a + s.b);
    double v1, e1, v2, e2;
    detail::gk15(f, s.a, m, v1, e1);
    detail::gk15(f, m, s.b, v2, e2);
    if (e1 + e2 >= s.err && s.depth > 3) {  // refinement no longer helps
      total += s.val;
      continue;
    }
    if (top + 2 >= 4096) throw std::runtime_error("integrate: stack overflow");
    stack[top++] = {s.a, m, v1, e1, s.depth + 1};
    stack[top++] = {m, s.b, v2, e2, s.depth + 1};
  }
  return total;
}

// n-node Gauss-Legendre on [a,b] (nodes computed by Newton on Legendre P_n).
inline void gauss_legendre(int n, double a, double b, double* xs, double* ws) {
  const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    xs[i] = xm - xl * z;
    xs[n - 1 - i] = xm + xl * z;
    ws[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    ws[n - 1 - i] = ws[i];
  }
}

}  // namespace seqprob

#pragma once

// Scalar numerics shared by the distribution and copula code: the normal
// probit, adaptive Simpson quadrature and a safeguarded monotone root finder.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <limits>
#include <numbers>

#include "gexp/types.hpp"

namespace gexp::special {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step against erfc, which brings it to full double accuracy.
inline double normal_quantile(double p) {
  gexp::detail::require_domain(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement; the residual is formed on the tail that keeps precision.
  const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with absolute tolerance tol.
/// The interval is pre-split into `panels` pieces so narrow features are not
/// skipped by the first coarse estimate.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                        int panels = 8) {
  if (a == b) return 0.0;
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * h;
    const double hi = (k + 1 == panels) ? b : lo + h;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / panels, 50);
  }
  return total;
}

/// Solves cdf(x) = p for an increasing cdf with density pdf. Expands a
/// bracket around `guess`, then runs Newton steps that fall back to bisection
/// whenever they leave the bracket. Stops when the bracket or the step is
/// below xtol (1 + |x|) or the residual is below ftol.
inline double invert_increasing(const std::function<double(double)>& cdf, const std::function<double(double)>& pdf,
                                double p, double guess, double scale = 1.0, double xtol = 1e-13,
                                double ftol = 1e-15) {
  double lo = guess - scale;
  double hi = guess + scale;
  double step = scale;
  while (cdf(lo) > p) {
    step *= 2.0;
    lo -= step;
    if (!std::isfinite(lo)) throw std::runtime_error("invert_increasing: bracket diverged");
  }
  step = scale;
  while (cdf(hi) < p) {
    step *= 2.0;
    hi += step;
    if (!std::isfinite(hi)) throw std::runtime_error("invert_increasing: bracket diverged");
  }
  double x = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = cdf(x) - p;
    if (std::abs(fx) <= ftol) return x;
    if (fx > 0.0) hi = x;
    else lo = x;
    if (hi - lo <= xtol * (1.0 + std::abs(x))) return 0.5 * (lo + hi);
    const double dens = pdf(x);
    double next = (dens > 0.0) ? x - fx / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= xtol * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

/// First Debye function D1(x) = (1/x) int_0^x t / (e^t - 1) dt, any x != 0.
inline double debye1(double x) {
  gexp::detail::require(x != 0.0 && std::isfinite(x), "debye1: argument must be finite and non-zero");
  auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  return integrate(integrand, 0.0, x, 1e-12, 16) / x;
}

}  // namespace gexp::special

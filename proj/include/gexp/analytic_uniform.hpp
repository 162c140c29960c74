#pragma once

// Closed-form expected loss E[Lambda_alpha(U - c)] for U uniform on a box
// [a1, b1] x [a2, b2]:
//
//   phi(c) = g(c) / 2 + alpha_1 g1(c) / 2 + alpha_2 g2(c) / 2,
//   g  = E|U - c|^2,
//   g1 = E[|U - c| (U_1 - c_1)],  g2 = E[|U - c| (U_2 - c_2)],
//
// with g1 expressed through the antiderivative pair
//   h1(x, y) = (y r + x^2 log(y + r)) / 2,                       r = sqrt(x^2 + y^2)
//   h2(x, y) = (-3 x^4 + 20 x^2 y r + y^3 (3 y + 8 r) + 12 x^4 log(y + r)) / 96,
// where d/dy h1 = r and d/dx h2 = x h1.

#include <cmath>

#include "gexp/optimizer.hpp"
#include "gexp/types.hpp"

namespace gexp::analytic {

struct UniformBox {
  double a1 = 0.0;
  double b1 = 1.0;
  double a2 = 0.0;
  double b2 = 1.0;

  void validate() const {
    detail::require(std::isfinite(a1) && std::isfinite(b1) && std::isfinite(a2) && std::isfinite(b2),
                    "UniformBox: bounds must be finite");
    detail::require(b1 > a1 && b2 > a2, "UniformBox: need b1 > a1 and b2 > a2");
  }

  [[nodiscard]] double area() const { return (b1 - a1) * (b2 - a2); }
  [[nodiscard]] UniformBox swapped() const { return {a2, b2, a1, b1}; }
  [[nodiscard]] Vector midpoint() const {
    Vector m(2);
    m << 0.5 * (a1 + b1), 0.5 * (a2 + b2);
    return m;
  }
};

namespace detail {

// x^k log(y + r) with the x = 0 limit taken as 0. For y < 0 the argument is
// evaluated as x^2 / (r - y), which is the same quantity without cancellation.
inline double xpow_log(double x, double y, int k) {
  if (x == 0.0) return 0.0;
  const double r = std::hypot(x, y);
  const double log_arg = (y >= 0.0) ? std::log(y + r) : 2.0 * std::log(std::abs(x)) - std::log(r - y);
  return std::pow(x, k) * log_arg;
}

}  // namespace detail

inline double h1(double x, double y) {
  const double r = std::hypot(x, y);
  return 0.5 * (y * r + detail::xpow_log(x, y, 2));
}

inline double h2(double x, double y) {
  const double r = std::hypot(x, y);
  const double x2 = x * x;
  return (-3.0 * x2 * x2 + 20.0 * x2 * y * r + y * y * y * (3.0 * y + 8.0 * r) + 12.0 * detail::xpow_log(x, y, 4)) /
         96.0;
}

inline double g(const UniformBox& box, const Eigen::Ref<const Vector>& c) {
  box.validate();
  gexp::detail::require(c.size() == 2, "g: point must be two-dimensional");
  const double w1 = box.b1 - box.a1;
  const double w2 = box.b2 - box.a2;
  auto cube = [](double v) { return v * v * v; };
  return (w2 * (cube(box.b1 - c[0]) - cube(box.a1 - c[0])) + w1 * (cube(box.b2 - c[1]) - cube(box.a2 - c[1]))) /
         (3.0 * w1 * w2);
}

inline double g1(const UniformBox& box, const Eigen::Ref<const Vector>& c) {
  box.validate();
  gexp::detail::require(c.size() == 2, "g1: point must be two-dimensional");
  const double lo1 = box.a1 - c[0];
  const double hi1 = box.b1 - c[0];
  const double lo2 = box.a2 - c[1];
  const double hi2 = box.b2 - c[1];
  return (h2(hi1, hi2) - h2(lo1, hi2) - h2(hi1, lo2) + h2(lo1, lo2)) / box.area();
}

inline double g2(const UniformBox& box, const Eigen::Ref<const Vector>& c) {
  gexp::detail::require(c.size() == 2, "g2: point must be two-dimensional");
  Vector swapped(2);
  swapped << c[1], c[0];
  return g1(box.swapped(), swapped);
}

inline double phi_uniform(const UniformBox& box, const Index& alpha, const Eigen::Ref<const Vector>& c) {
  gexp::detail::require(alpha.dim() == 2 && c.size() == 2, "phi_uniform: requires d = 2");
  gexp::detail::require(c.allFinite(), "phi_uniform: point must be finite");
  return 0.5 * g(box, c) + 0.5 * alpha[0] * g1(box, c) + 0.5 * alpha[1] * g2(box, c);
}

/// Minimizer of phi_uniform by the quasi-Newton solver using central
/// finite-difference gradients (step 1e-6), started from the box midpoint.
inline SolveReport uniform_expectile(const UniformBox& box, const Index& alpha, SolverConfig cfg = {}) {
  box.validate();
  gexp::detail::require(alpha.dim() == 2, "uniform_expectile: requires d = 2");
  constexpr double kStep = 1e-6;
  auto f = [&](const Vector& c, Vector* grad) {
    const double value = phi_uniform(box, alpha, c);
    if (grad) {
      grad->resize(2);
      Vector e = c;
      for (int k = 0; k < 2; ++k) {
        e[k] = c[k] + kStep;
        const double up = phi_uniform(box, alpha, e);
        e[k] = c[k] - kStep;
        const double down = phi_uniform(box, alpha, e);
        e[k] = c[k];
        (*grad)[k] = (up - down) / (2.0 * kStep);
      }
    }
    return value;
  };
  Vector start = cfg.initial_point ? *cfg.initial_point : box.midpoint();
  cfg.initial_point.reset();
  return minimize_quasi_newton(f, std::move(start), cfg);
}

}  // namespace gexp::analytic

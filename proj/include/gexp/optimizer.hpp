#pragma once

#include <cassert>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>

#include "gexp/types.hpp"

namespace gexp {

struct SolverConfig {
  double grad_tolerance = 1e-8;
  int max_iterations = 500;
  std::optional<Vector> initial_point;  // defaults to the sample column means

  void validate() const {
    detail::require(grad_tolerance > 0.0 && std::isfinite(grad_tolerance),
                    "SolverConfig: grad_tolerance must be > 0");
    detail::require(max_iterations >= 1, "SolverConfig: max_iterations must be >= 1");
    if (initial_point) {
      detail::require(initial_point->allFinite(), "SolverConfig: initial point must be finite");
    }
  }
};

struct SolveReport {
  Vector argmin;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when the minimizer may be non-unique (e.g. geometric VaR of a
  /// collinear sample).
  bool degenerate_possible = false;
};

/// Objective callable: returns f(x) and writes the gradient into *grad when
/// grad is non-null.
template <class F>
concept DifferentiableObjective = requires(F f, const Vector& x, Vector* g) {
  { f(x, g) } -> std::convertible_to<double>;
};

namespace detail {

inline bool gradient_converged(double grad_norm, double objective, double tol) {
  return grad_norm <= tol * (1.0 + std::abs(objective));
}

}  // namespace detail

/// Damped BFGS on the inverse Hessian with Armijo backtracking (halving,
/// c = 1e-4). When the trial decrease is below the rounding level of f the
/// step is judged by approximate Wolfe conditions instead. Falls back to
/// steepest descent whenever the secant direction is not a descent
/// direction or its line search stalls. Stops when
/// |grad| <= tol (1 + |f|), or when the accepted step shrinks below
/// 1e-14 (1 + |x|) (stagnation; converged stays false).
template <DifferentiableObjective F>
SolveReport minimize_quasi_newton(F&& objective, Vector x, const SolverConfig& cfg) {
  cfg.validate();
  constexpr double kArmijo = 1e-4;
  constexpr double kStepFloor = 1e-14;
  constexpr double kNoise = 1e-13;
  constexpr double kApproxArmijo = 0.1;
  constexpr double kCurvature = 0.9;

  const Eigen::Index d = x.size();
  Vector g(d);
  double f = objective(x, &g);

  SolveReport report;
  Matrix h = Matrix::Identity(d, d);
  bool h_scaled = false;

  Vector g_new(d);
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const double gnorm = g.norm();
    if (detail::gradient_converged(gnorm, f, cfg.grad_tolerance)) {
      report.converged = true;
      break;
    }

    Vector p = -(h * g);
    bool steepest = false;
    if (!(g.dot(p) < -1e-16 * gnorm * p.norm())) {
      h.setIdentity();
      h_scaled = false;
      p = -g;
      steepest = true;
    }

    // Backtracking line search; retried once along -g if the secant
    // direction fails.
    double step = 1.0;
    double f_new = f;
    Vector x_new;
    bool accepted = false;
    for (;;) {
      const double slope = g.dot(p);
      step = 1.0;
      for (;;) {
        x_new = x + step * p;
        if (step * p.norm() <= kStepFloor * (1.0 + x.norm())) break;
        f_new = objective(x_new, nullptr);
        if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope) {
          accepted = true;
          break;
        }
        // Near the optimum the decrease drowns in summation rounding; fall
        // back to approximate Wolfe conditions on the directional derivative.
        if (std::isfinite(f_new) && f_new <= f + kNoise * (1.0 + std::abs(f))) {
          objective(x_new, &g_new);
          const double slope_new = g_new.dot(p);
          if (slope_new >= kCurvature * slope && slope_new <= (2.0 * kApproxArmijo - 1.0) * slope) {
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (accepted || steepest) break;
      h.setIdentity();
      h_scaled = false;
      p = -g;
      steepest = true;
    }
    if (!accepted) break;  // stagnation

    f_new = objective(x_new, &g_new);
    assert(f_new <= f + kNoise * (1.0 + std::abs(f)));

    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (!h_scaled) {
        h *= sy / y.squaredNorm();
        h_scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector hy = h * y;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
    }

    x = x_new;
    f = f_new;
    g = g_new;
  }

  report.argmin = std::move(x);
  report.objective = f;
  report.grad_norm = g.norm();
  report.iterations = it;
  if (!report.converged) {
    report.converged = detail::gradient_converged(report.grad_norm, f, cfg.grad_tolerance);
  }
  return report;
}

}  // namespace gexp

#pragma once

// Loss and scoring functions for univariate and geometric quantiles and
// expectiles, with their (sub)gradients.
//
//   check loss        rho_a(t)    = |a - 1{t <= 0}| |t|
//   expectile loss    lambda_a(t) = |a - 1{t <= 0}| t^2
//   geometric VaR     Phi_u(t)    = (|t| + <u,t>) / 2
//   geometric exp.    Lambda_u(t) = |t| (|t| + <u,t>) / 2
//
// For d = 1, Phi_u = rho_{(1+u)/2} and Lambda_u = lambda_{(1+u)/2}.

#include <cmath>

#include "gexp/types.hpp"

namespace gexp {

namespace detail {

inline void check_level(double alpha) {
  require_domain(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0,
                 "level must lie in (0, 1)");
}

inline void check_point(const Index& u, const Eigen::Ref<const Vector>& t) {
  require(u.dim() == t.size(), "dimension mismatch between index and point");
  require(t.allFinite(), "point must be finite");
}

// Unchecked kernels used inside objective loops. `norm` is |t|, `dot` is <u,t>.
inline double phi_kernel(double norm, double dot) { return 0.5 * (norm + dot); }
inline double lambda_kernel(double norm, double dot) { return 0.5 * norm * (norm + dot); }

}  // namespace detail

inline double check_loss(double alpha, double t) {
  detail::check_level(alpha);
  detail::require(std::isfinite(t), "check_loss: argument must be finite");
  return std::abs(alpha - (t <= 0.0 ? 1.0 : 0.0)) * std::abs(t);
}

inline double expectile_loss_1d(double alpha, double t) {
  detail::check_level(alpha);
  detail::require(std::isfinite(t), "expectile_loss_1d: argument must be finite");
  return std::abs(alpha - (t <= 0.0 ? 1.0 : 0.0)) * t * t;
}

/// Equivalent form 0.5 |t| (|t| + (2a - 1) t) of the expectile loss.
inline double expectile_loss_1d_symmetric(double alpha, double t) {
  detail::check_level(alpha);
  detail::require(std::isfinite(t), "expectile_loss_1d: argument must be finite");
  return 0.5 * std::abs(t) * (std::abs(t) + (2.0 * alpha - 1.0) * t);
}

inline double phi_loss(const Index& u, const Eigen::Ref<const Vector>& t) {
  detail::check_point(u, t);
  return detail::phi_kernel(t.norm(), u.values().dot(t));
}

/// Subgradient of Phi_u. At t = 0 the norm term contributes the zero
/// subgradient, leaving u / 2.
inline Vector phi_subgrad(const Index& u, const Eigen::Ref<const Vector>& t) {
  detail::check_point(u, t);
  const double n = t.norm();
  if (n == 0.0) return 0.5 * u.values();
  return 0.5 * (t / n + u.values());
}

inline double lambda_loss(const Index& u, const Eigen::Ref<const Vector>& t) {
  detail::check_point(u, t);
  return detail::lambda_kernel(t.norm(), u.values().dot(t));
}

/// Gradient of Lambda_u; component k is
///   t_k + t_k <u,t> / (2|t|) + |t| u_k / 2,
/// and exactly zero at the origin.
inline Vector lambda_grad(const Index& u, const Eigen::Ref<const Vector>& t) {
  detail::check_point(u, t);
  const double n = t.norm();
  if (n == 0.0) return Vector::Zero(t.size());
  const double dot = u.values().dot(t);
  return t * (1.0 + 0.5 * dot / n) + 0.5 * n * u.values();
}

/// Scoring function S_u(x, y) = Lambda_u(x - y).
inline double score(const Index& u, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& y) {
  detail::require(x.size() == y.size(), "score: dimension mismatch");
  detail::require(y.allFinite(), "score: point must be finite");
  return lambda_loss(u, x - y);
}

/// Maps a traditional confidence level in (0,1) to an index magnitude in (-1,1).
inline double index_from_level(double level) {
  detail::check_level(level);
  return 2.0 * level - 1.0;
}

}  // namespace gexp

#pragma once

// Empirical geometric expectiles and geometric VaR as minimizers of sample
// averages of Lambda_u / Phi_u, plus univariate order-statistic and
// root-finding references.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gexp/losses.hpp"
#include "gexp/optimizer.hpp"
#include "gexp/types.hpp"

namespace gexp {

enum class LossKind { expectile, quantile };

namespace detail {

inline void check_objective_args(const Sample& s, const Index& u, const Eigen::Ref<const Vector>& c) {
  require(!s.empty(), "empirical objective: empty sample");
  require(s.dim() == u.dim() && s.dim() == c.size(), "empirical objective: dimension mismatch");
  require(c.allFinite(), "empirical objective: point must be finite");
}

// phi_n(c) and, optionally, its gradient. Arguments are assumed validated.
// With `min_norm` the quantile kind returns the minimum-norm element of the
// subdifferential when c coincides with data points; otherwise the u/2
// subgradient is used there.
inline double objective_unchecked(const Sample& s, const Vector& u, const Vector& c, LossKind kind,
                                  Vector* grad, bool min_norm = false) {
  const Matrix& x = s.rows();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  double total = 0.0;
  if (grad) grad->setZero(d);
  Vector t(d);
  Eigen::Index ties = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    t = x.row(i).transpose() - c;
    const double norm = t.norm();
    const double dot = u.dot(t);
    if (kind == LossKind::expectile) {
      total += lambda_kernel(norm, dot);
      if (grad && norm > 0.0) *grad += t * (1.0 + 0.5 * dot / norm) + (0.5 * norm) * u;
    } else {
      total += phi_kernel(norm, dot);
      if (grad) {
        if (norm > 0.0) {
          *grad += 0.5 * (t / norm + u);
        } else {
          *grad += 0.5 * u;
          ++ties;
        }
      }
    }
  }
  if (grad && min_norm && ties > 0) {
    const double radius = 0.5 * static_cast<double>(ties);
    const double gn = grad->norm();
    if (gn <= radius) grad->setZero();
    else *grad *= 1.0 - radius / gn;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad) *grad *= -inv_n;  // d/dc of L(x - c)
  return total * inv_n;
}

inline bool all_rows_identical(const Sample& s) {
  const Matrix& x = s.rows();
  for (Eigen::Index i = 1; i < x.rows(); ++i)
    if (x.row(i) != x.row(0)) return false;
  return true;
}

inline bool rows_collinear(const Sample& s) {
  if (s.dim() == 1 || s.size() <= 2) return true;
  const Matrix centered = s.rows().rowwise() - s.rows().colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(centered);
  const auto& sv = svd.singularValues();
  return sv.size() < 2 || sv[1] <= 1e-12 * std::max(sv[0], 1e-300);
}

// After a stalled quantile solve the minimizer often sits on a datum, where
// the objective has a kink. Test the nearest data points for optimality and
// restart from the best one if it improves on the current point.
inline bool snap_to_datum(const Sample& s, const SolverConfig& cfg,
                          const std::function<double(const Vector&, Vector*)>& f, SolveReport& r) {
  constexpr Eigen::Index kCandidates = 8;
  const Matrix& x = s.rows();
  const Eigen::Index n = x.rows();
  std::vector<std::pair<double, Eigen::Index>> by_dist;
  by_dist.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) by_dist.emplace_back((x.row(i).transpose() - r.argmin).squaredNorm(), i);
  const auto k = static_cast<std::ptrdiff_t>(std::min(kCandidates, n));
  std::partial_sort(by_dist.begin(), by_dist.begin() + k, by_dist.end());

  SolveReport best;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t j = 0; j < k; ++j) {
    const Vector c = x.row(by_dist[static_cast<std::size_t>(j)].second).transpose();
    Vector g;
    const double fc = f(c, &g);
    if (fc < best.objective) {
      best.argmin = c;
      best.objective = fc;
      best.grad_norm = g.norm();
      best.converged = gradient_converged(best.grad_norm, fc, cfg.grad_tolerance);
    }
  }
  if (!(best.objective < r.objective) && !best.converged) return false;
  best.iterations = r.iterations;
  if (best.converged) {
    r = best;
    return false;
  }
  SolveReport again = minimize_quasi_newton(f, best.argmin, cfg);
  again.iterations += r.iterations;
  r = (again.objective <= best.objective) ? again : best;
  return !r.converged;
}

inline SolveReport solve_in_place(const Sample& s, const Vector& u, Vector start, const SolverConfig& cfg,
                                  LossKind kind) {
  const std::function<double(const Vector&, Vector*)> f = [&](const Vector& c, Vector* g) {
    return objective_unchecked(s, u, c, kind, g, true);
  };
  constexpr int kSnapRounds = 20;
  SolveReport r = minimize_quasi_newton(f, std::move(start), cfg);
  if (kind == LossKind::quantile)
    for (int round = 0; round < kSnapRounds && !r.converged; ++round)
      if (!snap_to_datum(s, cfg, f, r)) break;
  return r;
}

// The stopping rule is relative to 1 + |phi_n|, which is not invariant under
// rescaling of the data, so the solve runs on the sample centered at its mean
// and divided by its root-mean-square radius. The result is then re-checked
// (and if needed polished) in the original units.
inline SolveReport minimize_empirical(const Sample& s, const Index& alpha, const SolverConfig& cfg,
                                      LossKind kind) {
  cfg.validate();
  require(!s.empty(), "estimator: empty sample");
  require(s.dim() == alpha.dim(), "estimator: dimension mismatch between sample and index");
  Vector start = cfg.initial_point ? *cfg.initial_point : s.mean();
  require(start.size() == s.dim(), "estimator: initial point has wrong dimension");

  const Vector& u = alpha.values();
  auto f = [&](const Vector& c, Vector* g) { return objective_unchecked(s, u, c, kind, g, true); };

  if (all_rows_identical(s)) {
    SolveReport r;
    r.argmin = s.row(0);
    Vector g;
    r.objective = f(r.argmin, &g);
    r.grad_norm = 0.0;  // the datum is the unique minimizer
    r.iterations = 0;
    r.converged = true;
    return r;
  }

  const Vector center = s.mean();
  const Matrix centered = s.rows().rowwise() - center.transpose();
  const double scale = std::sqrt(centered.rowwise().squaredNorm().mean());
  const Sample z(centered / scale);
  SolveReport r = solve_in_place(z, u, (start - center) / scale, cfg, kind);

  r.argmin = center + scale * r.argmin;
  Vector g;
  r.objective = f(r.argmin, &g);
  r.grad_norm = g.norm();
  const bool was_converged = r.converged;
  r.converged = was_converged && gradient_converged(r.grad_norm, r.objective, cfg.grad_tolerance);
  if (was_converged && !r.converged) {
    SolveReport polished = solve_in_place(s, u, r.argmin, cfg, kind);
    polished.iterations += r.iterations;
    if (polished.converged || polished.objective <= r.objective) r = polished;
  }
  if (kind == LossKind::quantile) r.degenerate_possible = rows_collinear(s);
  return r;
}

}  // namespace detail

/// phi_n(c) = (1/n) sum_i L_u(x_i - c).
inline double empirical_objective(const Sample& s, const Index& u, const Eigen::Ref<const Vector>& c,
                                  LossKind kind) {
  detail::check_objective_args(s, u, c);
  return detail::objective_unchecked(s, u.values(), c, kind, nullptr);
}

/// Gradient of phi_n with respect to c; the quantile kind uses the u/2
/// subgradient at data points.
inline Vector empirical_objective_grad(const Sample& s, const Index& u, const Eigen::Ref<const Vector>& c,
                                       LossKind kind) {
  detail::check_objective_args(s, u, c);
  Vector g;
  detail::objective_unchecked(s, u.values(), c, kind, &g);
  return g;
}

inline SolveReport geometric_expectile(const Sample& s, const Index& alpha, const SolverConfig& cfg = {}) {
  return detail::minimize_empirical(s, alpha, cfg, LossKind::expectile);
}

/// Geometric quantile; alpha = 0 gives the spatial median.
inline SolveReport geometric_var(const Sample& s, const Index& alpha, const SolverConfig& cfg = {}) {
  return detail::minimize_empirical(s, alpha, cfg, LossKind::quantile);
}

inline SolveReport geometric_measure(const Sample& s, const Index& alpha, LossKind kind,
                                     const SolverConfig& cfg = {}) {
  return detail::minimize_empirical(s, alpha, cfg, kind);
}

/// Root of alpha sum (x_i - e)^+ = (1 - alpha) sum (e - x_i)^+ by bisection
/// on [min, max].
inline double univariate_expectile(std::span<const double> xs, double alpha) {
  detail::check_level(alpha);
  detail::require(!xs.empty(), "univariate_expectile: empty sample");
  auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  double lo = *lo_it;
  double hi = *hi_it;
  auto excess = [&](double e) {
    double up = 0.0;
    double down = 0.0;
    for (double x : xs) {
      if (x > e) up += x - e;
      else down += e - x;
    }
    return alpha * up - (1.0 - alpha) * down;  // decreasing in e
  };
  for (int i = 0; i < 400 && hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double univariate_expectile(const Eigen::Ref<const Vector>& xs, double alpha) {
  return univariate_expectile(std::span<const double>(xs.data(), static_cast<std::size_t>(xs.size())), alpha);
}

/// Generalized inverse inf{x : F_n(x) >= alpha}, i.e. the left endpoint of
/// the argmin set of the summed check loss.
inline double univariate_quantile(std::span<const double> xs, double alpha) {
  detail::check_level(alpha);
  detail::require(!xs.empty(), "univariate_quantile: empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(alpha * n));
  if (k > 1 && static_cast<double>(k - 1) / n >= alpha) --k;
  while (k < sorted.size() && static_cast<double>(k) / n < alpha) ++k;
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

inline double univariate_quantile(const Eigen::Ref<const Vector>& xs, double alpha) {
  return univariate_quantile(std::span<const double>(xs.data(), static_cast<std::size_t>(xs.size())), alpha);
}

}  // namespace gexp

#pragma once

// Curve tracing over index paths and the derived experiments: multivariate
// subadditivity sets, comparison with univariate measures, VaR/expectile
// magnitude matching, marginalization and the distance-to-mean curve.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gexp/estimators.hpp"
#include "gexp/geometry.hpp"
#include "gexp/models.hpp"
#include "gexp/types.hpp"

namespace gexp {

// ---------------------------------------------------------------------------
// Index paths

/// r (cos phi, sin phi), phi_k = 2 pi k / n_phi.
struct Circle {
  double r = 0.98;
};
/// (r1 cos phi, r2 sin phi), phi_k = 2 pi k / n_phi.
struct Ellipse {
  double r1 = 0.98;
  double r2 = 0.90;
};
/// r (cos phi, sin phi) on phi in [0, pi/2], endpoints included.
struct QuarterCircle {
  double r = 0.98;
};
/// (r1 cos phi, r2 sin phi) on phi in [0, pi/2], endpoints included.
struct QuarterEllipse {
  double r1 = 0.98;
  double r2 = 0.90;
};
/// m u for each magnitude m of the grid; the parameter is m.
struct Ray {
  Vector direction;
  std::vector<double> magnitudes;
};

struct IndexPath {
  std::variant<Circle, Ellipse, QuarterCircle, QuarterEllipse, Ray> shape = Circle{};
  int n_phi = 64;
};

struct PathPoint {
  double param;
  Index index;
};

/// Indices along the path. Planar paths live in the first two coordinates
/// and are zero-padded to dimension d.
inline std::vector<PathPoint> path_points(const IndexPath& path, Eigen::Index d) {
  detail::require(d >= 1, "path_points: dimension must be >= 1");
  std::vector<PathPoint> out;
  auto planar = [&](double r1, double r2, bool quarter) {
    detail::require(d >= 2, "path_points: planar paths need d >= 2");
    detail::require(path.n_phi >= 1, "path_points: n_phi must be >= 1");
    for (int k = 0; k < path.n_phi; ++k) {
      const double phi = quarter ? (path.n_phi == 1 ? 0.0 : 0.5 * std::numbers::pi * k / (path.n_phi - 1))
                                 : 2.0 * std::numbers::pi * k / path.n_phi;
      Vector a = Vector::Zero(d);
      a[0] = r1 * std::cos(phi);
      a[1] = r2 * std::sin(phi);
      out.push_back({phi, Index(std::move(a))});
    }
  };
  auto check_radius = [](double r) {
    detail::require_domain(r > 0.0 && r < 1.0, "path radius must lie in (0, 1)");
  };
  std::visit(detail::overloaded{
                 [&](const Circle& c) {
                   check_radius(c.r);
                   planar(c.r, c.r, false);
                 },
                 [&](const Ellipse& e) {
                   check_radius(e.r1);
                   check_radius(e.r2);
                   planar(e.r1, e.r2, false);
                 },
                 [&](const QuarterCircle& c) {
                   check_radius(c.r);
                   planar(c.r, c.r, true);
                 },
                 [&](const QuarterEllipse& e) {
                   check_radius(e.r1);
                   check_radius(e.r2);
                   planar(e.r1, e.r2, true);
                 },
                 [&](const Ray& ray) {
                   detail::require(ray.direction.size() == d, "Ray: direction has wrong dimension");
                   detail::require(std::abs(ray.direction.norm() - 1.0) <= 1e-12, "Ray: direction must be a unit vector");
                   double previous = -1.0;
                   for (double m : ray.magnitudes) {
                     detail::require(m > previous, "Ray: magnitudes must be strictly increasing");
                     detail::require_domain(m >= 0.0 && m < 1.0, "Ray: magnitudes must lie in [0, 1)");
                     out.push_back({m, Index(m * ray.direction)});
                     previous = m;
                   }
                 },
             },
             path.shape);
  return out;
}

// ---------------------------------------------------------------------------
// Curves

struct CurvePoint {
  double param = 0.0;
  Vector point;
  bool converged = false;
};

struct Curve {
  std::vector<CurvePoint> points;

  [[nodiscard]] bool all_converged() const {
    for (const auto& p : points)
      if (!p.converged) return false;
    return true;
  }
  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] std::vector<geometry::Point2> planar() const {
    std::vector<geometry::Point2> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.point[0], p.point[1]});
    return out;
  }
};

/// One solve per path index, each warm-started from the previous argmin.
inline Curve trace_curve(const Sample& s, const IndexPath& path, LossKind kind, const SolverConfig& cfg = {}) {
  Curve curve;
  SolverConfig local = cfg;
  for (const auto& pp : path_points(path, s.dim())) {
    SolveReport r = geometric_measure(s, pp.index, kind, local);
    local.initial_point = r.argmin;
    curve.points.push_back({pp.param, std::move(r.argmin), r.converged});
  }
  return curve;
}

/// True when every vertex of `inner` lies in the closed polygon of `outer`
/// (first two coordinates).
inline bool curve_inside(const Curve& inner, const Curve& outer) {
  const auto poly = outer.planar();
  const auto pts = inner.planar();
  return geometry::all_inside(pts, poly);
}

// ---------------------------------------------------------------------------
// Multivariate subadditivity

struct SubadditivityResult {
  Curve curve_sum;  // rho_alpha(X + Y)
  Curve curve_add;  // rho_alpha(X) + rho_alpha(Y)
  std::optional<bool> included;  // set only for d = 2
};

inline SubadditivityResult subadditivity_sets(const Sample& sx, const Sample& sy, double r, LossKind kind,
                                              int n_phi = 64, const SolverConfig& cfg = {}) {
  detail::require(sx.size() == sy.size() && sx.dim() == sy.dim(), "subadditivity_sets: samples must be paired");
  const IndexPath path{Circle{r}, n_phi};
  const Sample sum(sx.rows() + sy.rows());

  SubadditivityResult out;
  out.curve_sum = trace_curve(sum, path, kind, cfg);
  const Curve cx = trace_curve(sx, path, kind, cfg);
  const Curve cy = trace_curve(sy, path, kind, cfg);
  for (std::size_t k = 0; k < cx.size(); ++k) {
    out.curve_add.points.push_back(
        {cx.points[k].param, cx.points[k].point + cy.points[k].point, cx.points[k].converged && cy.points[k].converged});
  }
  if (sx.dim() == 2) out.included = curve_inside(out.curve_sum, out.curve_add);
  return out;
}

// ---------------------------------------------------------------------------
// Univariate comparison

struct UnivariateComparisonRow {
  double level = 0.0;
  double univariate_var = 0.0;
  double univariate_expectile = 0.0;
  double geometric_var = 0.0;        // first component at index (2 level - 1)(1, 0)
  double geometric_expectile = 0.0;  // first component at index (2 level - 1)(1, 0)
  bool converged = false;
};

inline std::vector<UnivariateComparisonRow> compare_univariate(const Sample& s, std::span<const double> levels,
                                                               const SolverConfig& cfg = {}) {
  detail::require(s.dim() == 2, "compare_univariate: requires a bivariate sample");
  const Vector first = s.column(0);
  std::vector<UnivariateComparisonRow> rows;
  for (double level : levels) {
    Vector a = Vector::Zero(2);
    a[0] = index_from_level(level);
    const Index alpha(a);
    const SolveReport gv = geometric_var(s, alpha, cfg);
    const SolveReport ge = geometric_expectile(s, alpha, cfg);
    rows.push_back({level, univariate_quantile(first, level), univariate_expectile(first, level), gv.argmin[0],
                    ge.argmin[0], gv.converged && ge.converged});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Magnitude matching

struct MagnitudeMatch {
  double m_star = 0.0;
  double gap = 0.0;       // squared distance at m_star
  Vector target;          // geometric expectile at theta u
  bool converged = true;  // every inner solve converged
  bool unimodal = true;   // recorded evaluations are consistent with unimodality
  std::vector<std::pair<double, double>> evaluations;  // (m, gap) in evaluation order
};

/// m* = argmin_{m in [0, 0.999]} |VaR_{m u} - e_{theta u}|^2 by golden-section
/// search to 1e-6.
inline MagnitudeMatch match_magnitude(const Sample& s, const Vector& u, double theta, const SolverConfig& cfg = {}) {
  detail::require(u.size() == s.dim(), "match_magnitude: direction has wrong dimension");
  detail::require(std::abs(u.norm() - 1.0) <= 1e-12, "match_magnitude: direction must be a unit vector");
  detail::require_domain(theta >= 0.0 && theta < 1.0, "match_magnitude: theta must lie in [0, 1)");
  constexpr double kLo = 0.0;
  constexpr double kHi = 0.999;
  constexpr double kTol = 1e-6;

  MagnitudeMatch out;
  const SolveReport target = geometric_expectile(s, Index(theta * u), cfg);
  out.target = target.argmin;
  out.converged = target.converged;

  SolverConfig local = cfg;
  auto gap = [&](double m) {
    const SolveReport v = geometric_var(s, Index(m * u), local);
    local.initial_point = v.argmin;
    out.converged = out.converged && v.converged;
    const double g = (v.argmin - out.target).squaredNorm();
    out.evaluations.emplace_back(m, g);
    return g;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kLo;
  double b = kHi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = gap(c);
  double fd = gap(d);
  while (b - a > kTol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = gap(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = gap(d);
    }
  }
  // Endpoints are admissible; compare against them as well.
  const double mid = 0.5 * (a + b);
  double best_m = mid;
  double best = gap(mid);
  for (double m : {kLo, kHi}) {
    const double g = gap(m);
    if (g < best) {
      best = g;
      best_m = m;
    }
  }
  out.m_star = best_m;
  out.gap = best;

  // Unimodality check: the gap sorted by m must fall then rise.
  auto evals = out.evaluations;
  std::sort(evals.begin(), evals.end());
  bool rising = false;
  for (std::size_t k = 1; k < evals.size(); ++k) {
    const double diff = evals[k].second - evals[k - 1].second;
    const double slack = 1e-9 * (1.0 + evals[k].second);
    if (diff > slack) rising = true;
    else if (rising && diff < -slack) out.unimodal = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Marginalization

struct MarginalizationResult {
  Curve margin_curve;                // e over beta_r(t) on the first two coordinates
  std::array<Curve, 7> full_curves;  // first two components of e over alpha_r^i(t)
  std::array<bool, 7> inclusion{};   // margin_curve inside full_curves[i]
  bool inclusion_i4 = false;
};

/// Third index component of alpha_r^i: (-3/4 + (i - 1)/4) sqrt(1 - r^2), i = 1..7.
inline double marginalization_offset(int i, double r) {
  detail::require(i >= 1 && i <= 7, "marginalization_offset: i must lie in 1..7");
  return (-0.75 + 0.25 * (i - 1)) * std::sqrt(1.0 - r * r);
}

inline MarginalizationResult marginalization_curves(const Sample& s3, double r, int n_phi = 64,
                                                    const SolverConfig& cfg = {}) {
  detail::require(s3.dim() == 3, "marginalization_curves: requires a trivariate sample");
  detail::require_domain(r > 0.0 && r < 1.0, "marginalization_curves: r must lie in (0, 1)");
  MarginalizationResult out;
  const IndexPath path{Circle{r}, n_phi};
  out.margin_curve = trace_curve(s3.columns({0, 1}), path, LossKind::expectile, cfg);

  const auto base = path_points(path, 2);
  for (int i = 1; i <= 7; ++i) {
    const double z = marginalization_offset(i, r);
    Curve& curve = out.full_curves[static_cast<std::size_t>(i - 1)];
    SolverConfig local = cfg;
    for (const auto& pp : base) {
      Vector a(3);
      a << pp.index[0], pp.index[1], z;
      SolveReport rep = geometric_expectile(s3, Index(a), local);
      local.initial_point = rep.argmin;
      curve.points.push_back({pp.param, rep.argmin.head(2), rep.converged});
    }
    out.inclusion[static_cast<std::size_t>(i - 1)] = curve_inside(out.margin_curve, curve);
  }
  out.inclusion_i4 = out.inclusion[3];
  return out;
}

// ---------------------------------------------------------------------------
// Distance to the mean

struct DistancePoint {
  double r = 0.0;
  double distance = 0.0;
  bool converged = false;
};

/// d(r) = |e_{r u} - mean| along an increasing grid of magnitudes in [0, 1).
inline std::vector<DistancePoint> distance_curve(const Sample& s, const Vector& u, std::span<const double> r_grid,
                                                 const SolverConfig& cfg = {}) {
  const IndexPath path{Ray{u, std::vector<double>(r_grid.begin(), r_grid.end())}, 0};
  const Curve curve = trace_curve(s, path, LossKind::expectile, cfg);
  const Vector mean = s.mean();
  std::vector<DistancePoint> out;
  for (const auto& p : curve.points) out.push_back({p.param, (p.point - mean).norm(), p.converged});
  return out;
}

/// Uniformly spaced magnitudes 0, step, 2 step, ... up to `last` inclusive.
inline std::vector<double> magnitude_grid(double step, double last) {
  detail::require(step > 0.0 && last < 1.0 && last >= 0.0, "magnitude_grid: invalid step or bound");
  std::vector<double> out;
  const auto count = static_cast<int>(std::floor(last / step + 1e-9));
  for (int k = 0; k <= count; ++k) out.push_back(k * step);
  return out;
}

// ---------------------------------------------------------------------------
// Bounded support

struct BoundedSupportRow {
  double r = 0.0;
  bool exits_unit_square = false;
  bool all_finite = true;
  bool converged = true;
};

/// Magnitudes at which the bivariate Clayton(5) copula contours are traced.
inline std::vector<double> default_bounded_support_radii() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.9995, 0.9999, 0.99999};
}

inline std::vector<BoundedSupportRow> bounded_support_check(const Sample& unit_sample, std::span<const double> r_list,
                                                            int n_phi = 64, const SolverConfig& cfg = {}) {
  detail::require(unit_sample.dim() == 2, "bounded_support_check: requires a bivariate sample");
  std::vector<BoundedSupportRow> rows;
  for (double r : r_list) {
    const Curve curve = trace_curve(unit_sample, IndexPath{Circle{r}, n_phi}, LossKind::expectile, cfg);
    BoundedSupportRow row{r, false, true, curve.all_converged()};
    for (const auto& p : curve.points) {
      if (!p.point.allFinite()) row.all_finite = false;
      if ((p.point.array() < 0.0).any() || (p.point.array() > 1.0).any()) row.exits_unit_square = true;
    }
    rows.push_back(row);
  }
  return rows;
}

/// Draws n points from the Clayton(5) copula on the stream `rng` and runs the
/// check on them.
inline std::vector<BoundedSupportRow> bounded_support_check(Eigen::Index n, std::span<const double> r_list, int n_phi,
                                                            const SolverConfig& cfg, Rng& rng) {
  const Sample s(copula_sample(Clayton{5.0, 2}, n, rng));
  return bounded_support_check(s, r_list, n_phi, cfg);
}

}  // namespace gexp

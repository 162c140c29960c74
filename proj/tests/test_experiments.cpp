#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gexp/experiments.hpp"
#include "gexp/geometry.hpp"
#include "gexp/models.hpp"
#include "oracles.hpp"

using namespace gexp;

namespace {

Sample gaussian_sample(int n, int d, std::uint64_t seed, bool symmetric = false) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = nd(gen) * (1.0 + 0.5 * j);
  return Sample(symmetric ? oracle::symmetrize(m) : m);
}

}  // namespace

TEST(Geometry, SquareAndDiamond) {
  const std::vector<geometry::Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<geometry::Point2> diamond{{0.5, 0}, {1, 0.5}, {0.5, 1}, {0, 0.5}};
  EXPECT_TRUE(geometry::all_inside(diamond, square));
  EXPECT_FALSE(geometry::all_inside(square, diamond));
  EXPECT_TRUE(geometry::point_in_polygon({0.5, 0.5}, diamond));
  EXPECT_FALSE(geometry::point_in_polygon({0.1, 0.1}, diamond));
  EXPECT_TRUE(geometry::point_in_polygon({0.25, 0.25}, diamond));  // on the edge
  EXPECT_FALSE(geometry::point_in_polygon({0.25 - 1e-6, 0.25 - 1e-6}, diamond));
  EXPECT_FALSE(geometry::point_in_polygon({2, 0.5}, square));
  EXPECT_NEAR(geometry::distance_to_segment({0, 1}, {-1, 0}, {1, 0}), 1.0, 1e-15);
}

TEST(PathPoints, Shapes) {
  const auto circle = path_points(IndexPath{Circle{0.98}, 8}, 2);
  ASSERT_EQ(circle.size(), 8u);
  EXPECT_NEAR(circle[2].param, std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(circle[2].index[1], 0.98, 1e-15);

  const auto quarter = path_points(IndexPath{QuarterCircle{0.5}, 8}, 2);
  EXPECT_DOUBLE_EQ(quarter.front().param, 0.0);
  EXPECT_NEAR(quarter.back().param, std::numbers::pi / 2, 1e-15);

  const auto padded = path_points(IndexPath{Ellipse{0.9, 0.5}, 4}, 3);
  EXPECT_EQ(padded[1].index.dim(), 3);
  EXPECT_DOUBLE_EQ(padded[1].index[2], 0.0);
  EXPECT_NEAR(padded[1].index[1], 0.5, 1e-15);

  Vector dir(2);
  dir << 0.6, -0.8;
  const auto ray = path_points(IndexPath{Ray{dir, {0.0, 0.5, 0.9}}, 0}, 2);
  ASSERT_EQ(ray.size(), 3u);
  EXPECT_NEAR(ray[2].index.norm(), 0.9, 1e-15);

  EXPECT_THROW(path_points(IndexPath{Circle{1.0}, 8}, 2), std::domain_error);
  EXPECT_THROW(path_points(IndexPath{Ray{dir, {0.5, 0.5}}, 0}, 2), std::invalid_argument);
  EXPECT_THROW(path_points(IndexPath{Ray{2 * dir, {0.5}}, 0}, 2), std::invalid_argument);
}

TEST(TraceCurve, SinglePointEqualsEstimator) {
  const Sample s = gaussian_sample(500, 2, 1);
  const Curve c = trace_curve(s, IndexPath{Circle{0.9}, 1}, LossKind::expectile);
  ASSERT_EQ(c.size(), 1u);
  Vector a(2);
  a << 0.9, 0.0;
  EXPECT_LE((c.points[0].point - geometric_expectile(s, Index(a)).argmin).norm(), 1e-12);
}

TEST(TraceCurve, CentralSymmetryOnSymmetrizedSample) {
  const Sample s = gaussian_sample(1000, 2, 2, true);
  for (LossKind kind : {LossKind::expectile, LossKind::quantile}) {
    const Curve c = trace_curve(s, IndexPath{Circle{0.98}, 16}, kind);
    EXPECT_TRUE(c.all_converged());
    if (kind == LossKind::quantile) continue;  // VaR minimizers are only unique up to tolerance
    for (int k = 0; k < 8; ++k) {
      const Vector mid = 0.5 * (c.points[static_cast<std::size_t>(k)].point + c.points[static_cast<std::size_t>(k + 8)].point);
      EXPECT_LE((mid - s.mean()).norm(), 1e-5);
    }
  }
}

TEST(TraceCurve, WarmStartsMatchColdStarts) {
  const Sample s = gaussian_sample(2000, 3, 3);
  const IndexPath path{Ellipse{0.95, 0.6}, 64};
  const Curve c = trace_curve(s, path, LossKind::expectile);
  const auto pts = path_points(path, 3);
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 8; ++rep) {
    const auto k = static_cast<std::size_t>(gen() % pts.size());
    EXPECT_LE((geometric_expectile(s, pts[k].index).argmin - c.points[k].point).norm(), 1e-6);
  }
}

TEST(TraceCurve, Figure4OrderingAroundMean) {
  Rng rng(4);
  const Sample s = simulate(presets::x1(), 10000, rng);
  const Curve c = trace_curve(s, IndexPath{Circle{0.98}, 8}, LossKind::expectile);
  // Marked point k lies in the direction of its index, so the angles about
  // the mean increase with k.
  const Vector mu = s.mean();
  for (std::size_t k = 0; k < 8; ++k) {
    const Vector d = c.points[k].point - mu;
    const double ang = std::atan2(d[1], d[0]);
    EXPECT_NEAR(std::remainder(ang - c.points[k].param, 2 * std::numbers::pi), 0.0, 0.3) << k;
  }
}

TEST(Subadditivity, ConstantSecondSummandGivesCoincidentCurves) {
  const Sample sx = gaussian_sample(800, 2, 5);
  Matrix y(800, 2);
  y.rowwise() = Eigen::RowVector2d(1.5, -2.0);
  const auto res = subadditivity_sets(sx, Sample(y), 0.5, LossKind::expectile, 32);
  ASSERT_TRUE(res.included.has_value());
  EXPECT_TRUE(*res.included);
  for (std::size_t k = 0; k < res.curve_sum.size(); ++k)
    EXPECT_LE((res.curve_sum.points[k].point - res.curve_add.points[k].point).norm(), 1e-6);
}

TEST(Subadditivity, NoInclusionFlagAboveTwoDimensions) {
  const Sample sx = gaussian_sample(200, 3, 6);
  const Sample sy = gaussian_sample(200, 3, 7);
  const auto res = subadditivity_sets(sx, sy, 0.3, LossKind::expectile, 8);
  EXPECT_FALSE(res.included.has_value());
  EXPECT_EQ(res.curve_sum.size(), 8u);
}

TEST(CompareUnivariate, CenterAndOrdering) {
  const Sample sym = gaussian_sample(5000, 2, 8, true);
  const std::vector<double> half{0.5};
  const auto row = compare_univariate(sym, half).front();
  const double mu = sym.mean()[0];
  for (double v : {row.univariate_var, row.univariate_expectile, row.geometric_var, row.geometric_expectile})
    EXPECT_NEAR(v, mu, 1e-3);

  Rng rng(9);
  const Sample x1 = simulate(presets::x1(), 10000, rng);
  const std::vector<double> levels{0.9};
  const auto r = compare_univariate(x1, levels).front();
  EXPECT_TRUE(r.converged);
  EXPECT_GE(std::abs(r.geometric_expectile), std::abs(r.univariate_expectile));
  const Vector col = x1.column(0);
  EXPECT_EQ(r.univariate_expectile, univariate_expectile(col, 0.9));
  EXPECT_EQ(r.univariate_var, univariate_quantile(col, 0.9));
}

TEST(MatchMagnitude, CenterAndDomain) {
  const Sample sym = gaussian_sample(2000, 2, 10, true);
  Vector u(2);
  u << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const auto m0 = match_magnitude(sym, u, 0.0);
  EXPECT_LE(m0.m_star, 1e-3);
  EXPECT_TRUE(m0.converged);

  Rng rng(11);
  const Sample x1 = simulate(presets::x1(), 10000, rng);
  for (double theta : {0.3, 0.8}) {
    const auto m = match_magnitude(x1, u, theta);
    EXPECT_GE(m.m_star, 0.0);
    EXPECT_LE(m.m_star, 0.999);
    EXPECT_LT(m.m_star, theta);
    EXPECT_TRUE(m.unimodal);
  }
  EXPECT_THROW(match_magnitude(x1, 2 * u, 0.5), std::invalid_argument);
  EXPECT_THROW(match_magnitude(x1, u, 1.0), std::domain_error);
}

TEST(Marginalization, OffsetsAndIndexNorms) {
  EXPECT_EQ(marginalization_offset(4, 0.3), 0.0);
  for (double r : {0.1, 0.5, 0.99}) {
    for (int i = 1; i <= 7; ++i) {
      const double z = marginalization_offset(i, r);
      EXPECT_LT(r * r + z * z, 1.0);
    }
  }
  EXPECT_THROW(marginalization_offset(0, 0.5), std::invalid_argument);
}

TEST(Marginalization, SmallRunProducesSevenCurves) {
  const Sample s = gaussian_sample(500, 3, 12);
  const auto res = marginalization_curves(s, 0.3, 16);
  EXPECT_EQ(res.margin_curve.size(), 16u);
  for (const auto& c : res.full_curves) {
    EXPECT_EQ(c.size(), 16u);
    EXPECT_TRUE(c.all_converged());
  }
  EXPECT_EQ(res.inclusion_i4, res.inclusion[3]);
}

TEST(DistanceCurve, StartsAtZeroAndIsNonnegative) {
  const Sample s = gaussian_sample(1000, 4, 13);
  Vector u = -Vector::Ones(4) / 2.0;
  const auto grid = magnitude_grid(0.1, 0.9);
  ASSERT_EQ(grid.size(), 10u);
  const auto d = distance_curve(s, u, grid);
  EXPECT_LE(d.front().distance, 1e-6);
  for (const auto& p : d) {
    EXPECT_GE(p.distance, 0.0);
    EXPECT_TRUE(p.converged);
  }
}

TEST(MagnitudeGrid, InclusiveUpperBound) {
  const auto g = magnitude_grid(0.005, 0.995);
  EXPECT_EQ(g.size(), 200u);
  EXPECT_NEAR(g.back(), 0.995, 1e-12);
}

TEST(BoundedSupport, SmallAndLargeRadius) {
  Rng rng(14);
  const std::vector<double> radii{0.1, 0.99999};
  const auto rows = bounded_support_check(20000, radii, 32, SolverConfig{}, rng);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].exits_unit_square);
  EXPECT_TRUE(rows[1].exits_unit_square);
  for (const auto& r : rows) EXPECT_TRUE(r.all_finite);
}

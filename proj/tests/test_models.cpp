#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gexp/models.hpp"
#include "gexp/stats.hpp"

using namespace gexp;

TEST(Simulate, X1Moments) {
  Rng rng(1);
  const Sample s = simulate(presets::x1(), 100000, rng);
  ASSERT_EQ(s.size(), 100000);
  for (int j = 0; j < 2; ++j) {
    const Vector col = s.column(j);
    EXPECT_NEAR(col.mean(), 0.0, 0.02);
    EXPECT_NEAR((col.array() - col.mean()).square().sum() / (col.size() - 1), 1.0, 0.03);
  }
}

TEST(Simulate, EmptySample) {
  Rng rng(1);
  const Sample s = simulate(presets::x3(), 0, rng);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.dim(), 2);
}

TEST(Simulate, X3KendallTau) {
  Rng rng(2);
  const Sample s = simulate(presets::x3(), 100000, rng);
  EXPECT_NEAR(stats::kendall_tau(s.column(0), s.column(1)), 0.5, 0.015);
}

TEST(Simulate, MarginsPassKs) {
  Rng root(3);
  for (const std::string& name : {"X2", "X4", "Z-clayton5", "frank3-4d"}) {
    const auto model = std::get<JointModel>(*presets::by_name(name));
    Rng rng = root.substream(name);
    const Sample s = simulate(model, 100000, rng);
    for (int j = 0; j < model.dim(); ++j) {
      const auto& m = model.margins[static_cast<std::size_t>(j)];
      EXPECT_LE(stats::ks_statistic(s.column(j), [&](double x) { return margin_cdf(m, x); }),
                stats::ks_critical(100000, 0.01))
          << name << " column " << j;
    }
  }
}

TEST(Simulate, SeedDeterminism) {
  for (const auto& name : presets::names()) {
    const Model m = *presets::by_name(name);
    Rng a(99);
    Rng b(99);
    EXPECT_EQ(simulate(m, 300, a).rows(), simulate(m, 300, b).rows()) << name;
  }
}

TEST(Simulate, ValidatesModel) {
  Rng rng(1);
  const JointModel bad{{Normal{0, 1}}, Clayton{2, 2}};
  EXPECT_THROW(simulate(bad, 10, rng), std::invalid_argument);
  EXPECT_THROW(simulate_compound(CompoundPoissonModel{0, presets::x1()}, 10, rng), std::invalid_argument);
}

TEST(SimulateCompound, TinyRateGivesZeros) {
  Rng rng(4);
  auto m = presets::cp_paper();
  m.lambda_rate = 1e-9;
  const Sample s = simulate_compound(m, 100, rng);
  int nonzero = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s.row(i).norm() > 0) ++nonzero;
  EXPECT_LE(nonzero, 1);
}

TEST(SimulateCompound, WaldMeansAndPositiveDependence) {
  Rng rng(5);
  const Sample s = simulate_compound(presets::cp_paper(), 100000, rng);
  const Vector expected = model_mean(Model{presets::cp_paper()});
  EXPECT_NEAR(expected[0], 10.0, 1e-12);
  EXPECT_NEAR(expected[1], 15.0, 1e-12);
  std::vector<double> a;
  std::vector<double> b;
  for (int j = 0; j < 2; ++j) {
    const Vector col = s.column(j);
    const double var = (col.array() - col.mean()).square().sum() / (col.size() - 1);
    EXPECT_LE(std::abs(col.mean() - expected[j]), 4 * std::sqrt(var / 1e5));
  }
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s.rows()(i, 0) > 0) {
      a.push_back(s.rows()(i, 0));
      b.push_back(s.rows()(i, 1));
    }
  }
  EXPECT_GT(stats::kendall_tau(a, b), 0.0);
}

TEST(ModelMean, Examples) {
  EXPECT_EQ(model_mean(presets::x1()), Vector::Zero(2));
  EXPECT_NEAR(model_mean(presets::x2())[0], -1 + 2 / std::sqrt(5.0) * std::sqrt(2 / std::numbers::pi), 1e-15);
  const JointModel cauchy{{StudentT{1}, Normal{0, 1}}, Independence{2}};
  EXPECT_THROW(model_mean(cauchy), std::domain_error);
  EXPECT_FALSE(cauchy.satisfies_second_moments());
}

TEST(Presets, RegistryRoundTrip) {
  for (const auto& name : presets::names()) EXPECT_TRUE(presets::by_name(name).has_value()) << name;
  EXPECT_FALSE(presets::by_name("nope").has_value());
  EXPECT_EQ(model_dim(*presets::by_name("Z-clayton5")), 4);
  EXPECT_EQ(model_dim(*presets::by_name("cp-paper")), 2);
}

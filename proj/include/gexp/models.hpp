#pragma once

// Joint models (margins joined by a copula), the compound Poisson vector
// sum_{k <= N} E_k, and the named presets used by the experiments.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gexp/copulas.hpp"
#include "gexp/distributions.hpp"
#include "gexp/rng.hpp"
#include "gexp/types.hpp"

namespace gexp {

struct JointModel {
  std::vector<MarginSpec> margins;
  CopulaSpec copula = Independence{2};

  [[nodiscard]] int dim() const { return static_cast<int>(margins.size()); }

  void validate() const {
    detail::require(!margins.empty(), "JointModel: needs at least one margin");
    for (const auto& m : margins) gexp::validate(m);
    gexp::validate(copula);
    detail::require(copula_dim(copula) == dim(), "JointModel: copula dimension must match the margin count");
  }

  /// Every margin has a finite variance, which the population expectile needs.
  [[nodiscard]] bool satisfies_second_moments() const {
    for (const auto& m : margins)
      if (!has_finite_second_moment(m)) return false;
    return true;
  }
};

struct CompoundPoissonModel {
  double lambda_rate = 1.0;
  JointModel severity;

  [[nodiscard]] int dim() const { return severity.dim(); }

  void validate() const {
    detail::require(lambda_rate > 0.0 && std::isfinite(lambda_rate), "CompoundPoissonModel: lambda must be > 0");
    detail::require(lambda_rate <= 30.0, "CompoundPoissonModel: lambda above 30 is not supported");
    severity.validate();
  }
};

using Model = std::variant<JointModel, CompoundPoissonModel>;

namespace detail {

template <class Row>
void joint_draw_row(const JointModel& m, Rng& rng, Row& u, Row& out) {
  copula_draw_row(m.copula, rng, u);
  for (std::size_t j = 0; j < m.margins.size(); ++j) out[j] = margin_quantile(m.margins[j], u[j]);
}

/// Poisson(lambda) by sequential search of the CDF (lambda <= 30).
inline int poisson_draw(double lambda, Rng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= lambda / k;
    cdf += p;
    if (p == 0.0) break;
  }
  return k;
}

}  // namespace detail

/// n x d sample: copula draws pushed through the margin quantile functions.
inline Sample simulate(const JointModel& m, Eigen::Index count, Rng& rng) {
  m.validate();
  detail::require(count >= 0, "simulate: count must be >= 0");
  const auto d = static_cast<std::size_t>(m.dim());
  Matrix x(count, m.dim());
  std::vector<double> u(d);
  std::vector<double> row(d);
  for (Eigen::Index i = 0; i < count; ++i) {
    detail::joint_draw_row(m, rng, u, row);
    for (std::size_t j = 0; j < d; ++j) x(i, static_cast<Eigen::Index>(j)) = row[j];
  }
  return Sample(std::move(x));
}

/// Each row is the component-wise sum of N ~ Poisson(lambda) severity draws.
inline Sample simulate_compound(const CompoundPoissonModel& m, Eigen::Index count, Rng& rng) {
  m.validate();
  detail::require(count >= 0, "simulate_compound: count must be >= 0");
  const auto d = static_cast<std::size_t>(m.dim());
  Matrix x = Matrix::Zero(count, m.dim());
  std::vector<double> u(d);
  std::vector<double> row(d);
  for (Eigen::Index i = 0; i < count; ++i) {
    const int claims = detail::poisson_draw(m.lambda_rate, rng);
    for (int k = 0; k < claims; ++k) {
      detail::joint_draw_row(m.severity, rng, u, row);
      for (std::size_t j = 0; j < d; ++j) x(i, static_cast<Eigen::Index>(j)) += row[j];
    }
  }
  return Sample(std::move(x));
}

inline Sample simulate(const Model& m, Eigen::Index count, Rng& rng) {
  return std::visit(detail::overloaded{
                        [&](const JointModel& jm) { return simulate(jm, count, rng); },
                        [&](const CompoundPoissonModel& cp) { return simulate_compound(cp, count, rng); },
                    },
                    m);
}

inline Vector model_mean(const JointModel& m) {
  m.validate();
  Vector mu(m.dim());
  for (int j = 0; j < m.dim(); ++j) mu[j] = margin_mean(m.margins[static_cast<std::size_t>(j)]);
  return mu;
}

/// Wald's identity: E[sum_{k <= N} E_k] = lambda E[E].
inline Vector model_mean(const CompoundPoissonModel& m) {
  m.validate();
  return m.lambda_rate * model_mean(m.severity);
}

inline Vector model_mean(const Model& m) {
  return std::visit([](const auto& x) { return model_mean(x); }, m);
}

inline int model_dim(const Model& m) {
  return std::visit([](const auto& x) { return x.dim(); }, m);
}

namespace presets {

/// Independent standard normals.
inline JointModel x1() { return {{Normal{0, 1}, Normal{0, 1}}, Independence{2}}; }
/// Skew normal (-1, 1, 2) and t_4, independent.
inline JointModel x2() { return {{SkewNormal{-1, 1, 2}, StudentT{4}}, Independence{2}}; }
/// Standard normals joined by a Gumbel copula, theta = 2.
inline JointModel x3() { return {{Normal{0, 1}, Normal{0, 1}}, GumbelCopula{2, 2}}; }
/// Margins of x2 with the dependence of x3.
inline JointModel x4() { return {{SkewNormal{-1, 1, 2}, StudentT{4}}, GumbelCopula{2, 2}}; }

/// Gumbel, t_4, logistic, N(0,1) joined by a 4-d Clayton copula, theta = 5.
inline JointModel z_clayton5() {
  return {{Gumbel{0, 1}, StudentT{4}, Logistic{0, 1}, Normal{0, 1}}, Clayton{5, 4}};
}

/// First three components of z_clayton5 (Gumbel, t_4, logistic; Clayton 5).
inline JointModel clayton5_3d() { return {{Gumbel{0, 1}, StudentT{4}, Logistic{0, 1}}, Clayton{5, 3}}; }

/// Gumbel, t_4, logistic, N(0,1) joined by a 4-d Frank copula, theta = 3.
inline JointModel frank3_4d() {
  return {{Gumbel{0, 1}, StudentT{4}, Logistic{0, 1}, Normal{0, 1}}, Frank{3, 4}};
}

/// Bivariate Clayton(5) copula itself (uniform margins).
inline JointModel clayton5_unit() { return {{Uniform{0, 1}, Uniform{0, 1}}, Clayton{5, 2}}; }

/// Exponential severities with means 10 and 15, Clayton(0.9), lambda = 1.
inline CompoundPoissonModel cp_paper() {
  return {1.0, JointModel{{Exponential{1.0 / 10.0}, Exponential{1.0 / 15.0}}, Clayton{0.9, 2}}};
}

/// Sample size the compound Poisson figure is drawn from.
inline constexpr Eigen::Index kCpPaperSampleSize = 100;

inline std::vector<std::string> names() {
  return {"X1", "X2", "X3", "X4", "Z-clayton5", "clayton5-3d", "frank3-4d", "clayton5-unit", "cp-paper"};
}

inline std::optional<Model> by_name(std::string_view name) {
  if (name == "X1") return x1();
  if (name == "X2") return x2();
  if (name == "X3") return x3();
  if (name == "X4") return x4();
  if (name == "Z-clayton5") return z_clayton5();
  if (name == "clayton5-3d") return clayton5_3d();
  if (name == "frank3-4d") return frank3_4d();
  if (name == "clayton5-unit") return clayton5_unit();
  if (name == "cp-paper") return cp_paper();
  return std::nullopt;
}

}  // namespace presets

}  // namespace gexp

#pragma once

// Archimedean copula samplers via the Marshall-Olkin frailty construction
//   U_j = psi(E_j / V),  E_j ~ Exp(1) iid,  V ~ frailty with Laplace transform psi.
//
//   Clayton(theta > 0)  V ~ Gamma(1/theta, 1)          psi(t) = (1 + t)^(-1/theta)
//   Gumbel(theta >= 1)  V ~ positive stable(1/theta)   psi(t) = exp(-t^(1/theta))
//   Frank(theta > 0)    V ~ Log-series(1 - e^-theta)   psi(t) = -log(1 - (1 - e^-theta) e^-t) / theta
//
// Frank with theta < 0 has no frailty; it is sampled for d = 2 by inverting
// the conditional distribution of U_2 given U_1.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "gexp/distributions.hpp"
#include "gexp/rng.hpp"
#include "gexp/special.hpp"
#include "gexp/types.hpp"

namespace gexp {

struct Independence {
  int d = 2;
};
struct Clayton {
  double theta = 1.0;
  int d = 2;
};
struct GumbelCopula {
  double theta = 1.0;
  int d = 2;
};
struct Frank {
  double theta = 1.0;
  int d = 2;
};

using CopulaSpec = std::variant<Independence, Clayton, GumbelCopula, Frank>;

inline int copula_dim(const CopulaSpec& c) {
  return std::visit([](const auto& s) { return s.d; }, c);
}

inline void validate(const CopulaSpec& c) {
  using detail::require;
  std::visit(detail::overloaded{
                 [](const Independence& s) { require(s.d >= 1, "Independence: d must be >= 1"); },
                 [](const Clayton& s) {
                   require(s.theta > 0.0 && std::isfinite(s.theta), "Clayton: theta must be > 0");
                   require(s.d >= 2, "Clayton: d must be >= 2");
                 },
                 [](const GumbelCopula& s) {
                   require(s.theta >= 1.0 && std::isfinite(s.theta), "Gumbel copula: theta must be >= 1");
                   require(s.d >= 2, "Gumbel copula: d must be >= 2");
                 },
                 [](const Frank& s) {
                   require(s.theta != 0.0 && std::isfinite(s.theta), "Frank: theta must be non-zero");
                   require(s.d >= 2, "Frank: d must be >= 2");
                   require(s.theta > 0.0 || s.d == 2, "Frank: negative theta is only supported for d = 2");
                 },
             },
             c);
}

namespace detail {

/// Marsaglia-Tsang gamma(shape, 1); shapes below one use the
/// G(a) = G(a + 1) U^(1/a) boost.
inline double gamma_draw(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return gamma_draw(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double dd = shape - 1.0 / 3.0;
  const double cc = 1.0 / std::sqrt(9.0 * dd);
  for (;;) {
    double x;
    double v;
    do {
      x = special::normal_quantile(rng.uniform());
      v = 1.0 + cc * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return dd * v;
    if (std::log(u) < 0.5 * x * x + dd * (1.0 - v + std::log(v))) return dd * v;
  }
}

/// Positive stable variable with Laplace transform exp(-t^a), 0 < a <= 1:
/// the Chambers-Mallows-Stuck construction for totally skewed stable laws,
/// in Kanter's form
///   S = sin(a U) / sin(U)^(1/a) * (sin((1 - a) U) / W)^((1 - a) / a),
/// U ~ Uniform(0, pi), W ~ Exp(1).
inline double positive_stable_draw(double a, Rng& rng) {
  if (a == 1.0) return 1.0;
  const double u = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
         std::pow(std::sin((1.0 - a) * u) / w, (1.0 - a) / a);
}

/// Logarithmic series P(V = k) = p^k / (-k log(1 - p)) by Kemp's LK
/// algorithm. `log1m_p` is log(1 - p), passed separately for accuracy when p
/// is close to one.
inline double log_series_draw(double p, double log1m_p, Rng& rng) {
  const double u = rng.uniform();
  if (u > p) return 1.0;
  const double q = -std::expm1(rng.uniform() * log1m_p);  // 1 - (1 - p)^v
  if (u < q * q) return std::floor(1.0 + std::log(u) / std::log(q));
  return u > q ? 1.0 : 2.0;
}

template <class Row>
void copula_draw_row(const CopulaSpec& spec, Rng& rng, Row&& out) {
  std::visit(overloaded{
                 [&](const Independence& s) {
                   for (int j = 0; j < s.d; ++j) out[j] = rng.uniform();
                 },
                 [&](const Clayton& s) {
                   const double v = gamma_draw(1.0 / s.theta, rng);
                   for (int j = 0; j < s.d; ++j)
                     out[j] = std::pow(1.0 + rng.exponential() / v, -1.0 / s.theta);
                 },
                 [&](const GumbelCopula& s) {
                   const double a = 1.0 / s.theta;
                   const double v = positive_stable_draw(a, rng);
                   for (int j = 0; j < s.d; ++j) out[j] = std::exp(-std::pow(rng.exponential() / v, a));
                 },
                 [&](const Frank& s) {
                   if (s.theta > 0.0) {
                     const double p = -std::expm1(-s.theta);
                     const double v = log_series_draw(p, -s.theta, rng);
                     for (int j = 0; j < s.d; ++j) {
                       const double t = rng.exponential() / v;
                       out[j] = -std::log1p(-p * std::exp(-t)) / s.theta;
                     }
                   } else {
                     const double u1 = rng.uniform();
                     const double w = rng.uniform();
                     const double em = std::expm1(-s.theta);  // e^-theta - 1
                     const double u2 =
                         -std::log1p(w * em / (w + (1.0 - w) * std::exp(-s.theta * u1))) / s.theta;
                     out[0] = u1;
                     out[1] = u2;
                   }
                 },
             },
             spec);
  // Guard the open interval against underflow/rounding at the extremes.
  const int d = copula_dim(spec);
  for (int j = 0; j < d; ++j) {
    double& x = out[j];
    if (!(x > 0.0)) x = std::numeric_limits<double>::min();
    if (!(x < 1.0)) x = std::nextafter(1.0, 0.0);
  }
}

}  // namespace detail

/// count x d matrix of copula draws, rows independent, entries in (0, 1).
inline Matrix copula_sample(const CopulaSpec& spec, Eigen::Index count, Rng& rng) {
  validate(spec);
  detail::require(count >= 0, "copula_sample: count must be >= 0");
  const int d = copula_dim(spec);
  Matrix out(count, d);
  std::vector<double> row(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < count; ++i) {
    detail::copula_draw_row(spec, rng, row);
    for (int j = 0; j < d; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

/// Pairwise Kendall's tau of the (exchangeable) copula.
inline double copula_kendall_tau(const CopulaSpec& spec) {
  validate(spec);
  return std::visit(detail::overloaded{
                        [](const Independence&) { return 0.0; },
                        [](const Clayton& s) { return s.theta / (s.theta + 2.0); },
                        [](const GumbelCopula& s) { return 1.0 - 1.0 / s.theta; },
                        [](const Frank& s) { return 1.0 + 4.0 * (special::debye1(s.theta) - 1.0) / s.theta; },
                    },
                    spec);
}

inline std::string to_string(const CopulaSpec& c) {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  return std::visit(detail::overloaded{
                        [&](const Independence& s) { return "independence:" + std::to_string(s.d); },
                        [&](const Clayton& s) { return "clayton:" + num(s.theta) + "," + std::to_string(s.d); },
                        [&](const GumbelCopula& s) {
                          return "gumbel:" + num(s.theta) + "," + std::to_string(s.d);
                        },
                        [&](const Frank& s) { return "frank:" + num(s.theta) + "," + std::to_string(s.d); },
                    },
                    c);
}

}  // namespace gexp

#pragma once

// Marginal distributions: CDF, density, quantile, sampling and moments.
//
// Quantiles are closed form except for the Student t (root-find on the CDF,
// which is the regularized incomplete beta) and the skew normal (root-find on
// a CDF obtained by adaptive Simpson integration of the density).

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "gexp/rng.hpp"
#include "gexp/special.hpp"
#include "gexp/types.hpp"

namespace gexp {

struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};
/// Standard Student t with nu degrees of freedom.
struct StudentT {
  double nu = 4.0;
};
/// Azzalini skew normal with location xi, scale omega and shape (slant).
struct SkewNormal {
  double xi = 0.0;
  double omega = 1.0;
  double shape = 0.0;
};
/// Gumbel (maximum) distribution, F(x) = exp(-exp(-(x - loc) / scale)).
struct Gumbel {
  double loc = 0.0;
  double scale = 1.0;
};
struct Logistic {
  double loc = 0.0;
  double scale = 1.0;
};
struct Exponential {
  double rate = 1.0;
};
struct Uniform {
  double a = 0.0;
  double b = 1.0;
};

using MarginSpec = std::variant<Normal, StudentT, SkewNormal, Gumbel, Logistic, Exponential, Uniform>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kSkewTail = 13.0;

inline double student_t_cdf(double nu, double t) {
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, x);
  return t < 0.0 ? tail : 1.0 - tail;
}

inline double student_t_pdf(double nu, double t) {
  const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

inline double skew_std_pdf(double shape, double z) {
  return 2.0 * special::normal_pdf(z) * special::normal_cdf(shape * z);
}

inline double skew_std_cdf(double shape, double z) {
  auto f = [shape](double s) { return skew_std_pdf(shape, s); };
  if (z <= -kSkewTail) return 0.0;
  if (z >= kSkewTail) return 1.0;
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (z <= 0.0) return Quad::integrate(f, -kSkewTail, z, 15, 1e-13);
  return 1.0 - Quad::integrate(f, z, kSkewTail, 15, 1e-13);
}

}  // namespace detail

inline void validate(const MarginSpec& m) {
  using detail::require;
  std::visit(detail::overloaded{
                 [](const Normal& d) { require(std::isfinite(d.mu) && d.sigma > 0.0, "Normal: sigma must be > 0"); },
                 [](const StudentT& d) { require(d.nu > 0.0 && std::isfinite(d.nu), "StudentT: nu must be > 0"); },
                 [](const SkewNormal& d) {
                   require(std::isfinite(d.xi) && std::isfinite(d.shape) && d.omega > 0.0,
                           "SkewNormal: omega must be > 0");
                 },
                 [](const Gumbel& d) { require(std::isfinite(d.loc) && d.scale > 0.0, "Gumbel: scale must be > 0"); },
                 [](const Logistic& d) {
                   require(std::isfinite(d.loc) && d.scale > 0.0, "Logistic: scale must be > 0");
                 },
                 [](const Exponential& d) {
                   require(d.rate > 0.0 && std::isfinite(d.rate), "Exponential: rate must be > 0");
                 },
                 [](const Uniform& d) {
                   require(std::isfinite(d.a) && std::isfinite(d.b) && d.b > d.a, "Uniform: b must exceed a");
                 },
             },
             m);
}

/// False for margins without a finite second moment (Student t with nu <= 2),
/// for which geometric expectiles are not defined at the population level.
inline bool has_finite_second_moment(const MarginSpec& m) {
  if (const auto* t = std::get_if<StudentT>(&m)) return t->nu > 2.0;
  return true;
}

inline double margin_cdf(const MarginSpec& m, double x) {
  validate(m);
  return std::visit(
      detail::overloaded{
          [x](const Normal& d) { return special::normal_cdf((x - d.mu) / d.sigma); },
          [x](const StudentT& d) { return detail::student_t_cdf(d.nu, x); },
          [x](const SkewNormal& d) { return detail::skew_std_cdf(d.shape, (x - d.xi) / d.omega); },
          [x](const Gumbel& d) { return std::exp(-std::exp(-(x - d.loc) / d.scale)); },
          [x](const Logistic& d) { return 1.0 / (1.0 + std::exp(-(x - d.loc) / d.scale)); },
          [x](const Exponential& d) { return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x); },
          [x](const Uniform& d) { return x <= d.a ? 0.0 : (x >= d.b ? 1.0 : (x - d.a) / (d.b - d.a)); },
      },
      m);
}

inline double margin_pdf(const MarginSpec& m, double x) {
  validate(m);
  return std::visit(
      detail::overloaded{
          [x](const Normal& d) { return special::normal_pdf((x - d.mu) / d.sigma) / d.sigma; },
          [x](const StudentT& d) { return detail::student_t_pdf(d.nu, x); },
          [x](const SkewNormal& d) { return detail::skew_std_pdf(d.shape, (x - d.xi) / d.omega) / d.omega; },
          [x](const Gumbel& d) {
            const double z = (x - d.loc) / d.scale;
            return std::exp(-z - std::exp(-z)) / d.scale;
          },
          [x](const Logistic& d) {
            const double e = std::exp(-std::abs(x - d.loc) / d.scale);
            return e / (d.scale * (1.0 + e) * (1.0 + e));
          },
          [x](const Exponential& d) { return x < 0.0 ? 0.0 : d.rate * std::exp(-d.rate * x); },
          [x](const Uniform& d) { return (x < d.a || x > d.b) ? 0.0 : 1.0 / (d.b - d.a); },
      },
      m);
}

inline double margin_quantile(const MarginSpec& m, double p) {
  validate(m);
  detail::require_domain(p > 0.0 && p < 1.0, "margin_quantile: p must lie in (0, 1)");
  return std::visit(
      detail::overloaded{
          [p](const Normal& d) { return d.mu + d.sigma * special::normal_quantile(p); },
          [p](const StudentT& d) {
            auto cdf = [nu = d.nu](double t) { return detail::student_t_cdf(nu, t); };
            auto pdf = [nu = d.nu](double t) { return detail::student_t_pdf(nu, t); };
            return special::invert_increasing(cdf, pdf, p, special::normal_quantile(p));
          },
          [p](const SkewNormal& d) {
            auto cdf = [a = d.shape](double z) { return detail::skew_std_cdf(a, z); };
            auto pdf = [a = d.shape](double z) { return detail::skew_std_pdf(a, z); };
            const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
            const double guess = delta * std::sqrt(2.0 / std::numbers::pi) + special::normal_quantile(p) *
                                                                             std::sqrt(1.0 - 2.0 * delta * delta /
                                                                                               std::numbers::pi);
            return d.xi + d.omega * special::invert_increasing(cdf, pdf, p, guess);
          },
          [p](const Gumbel& d) { return d.loc - d.scale * std::log(-std::log(p)); },
          [p](const Logistic& d) { return d.loc + d.scale * std::log(p / (1.0 - p)); },
          [p](const Exponential& d) { return -std::log1p(-p) / d.rate; },
          [p](const Uniform& d) { return d.a + p * (d.b - d.a); },
      },
      m);
}

/// One draw. Inverse transform for every margin except the skew normal,
/// which uses delta |Z0| + sqrt(1 - delta^2) Z1 with delta = shape / sqrt(1 + shape^2).
inline double margin_draw(const MarginSpec& m, Rng& rng) {
  if (const auto* sn = std::get_if<SkewNormal>(&m)) {
    const double delta = sn->shape / std::sqrt(1.0 + sn->shape * sn->shape);
    const double z0 = special::normal_quantile(rng.uniform());
    const double z1 = special::normal_quantile(rng.uniform());
    return sn->xi + sn->omega * (delta * std::abs(z0) + std::sqrt(1.0 - delta * delta) * z1);
  }
  return margin_quantile(m, rng.uniform());
}

inline std::vector<double> margin_sample(const MarginSpec& m, std::size_t count, Rng& rng) {
  validate(m);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(margin_draw(m, rng));
  return out;
}

inline double margin_mean(const MarginSpec& m) {
  validate(m);
  return std::visit(
      detail::overloaded{
          [](const Normal& d) { return d.mu; },
          [](const StudentT& d) {
            detail::require_domain(d.nu > 1.0, "margin_mean: Student t mean requires nu > 1");
            return 0.0;
          },
          [](const SkewNormal& d) {
            const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
            return d.xi + d.omega * delta * std::sqrt(2.0 / std::numbers::pi);
          },
          [](const Gumbel& d) { return d.loc + d.scale * detail::kEulerGamma; },
          [](const Logistic& d) { return d.loc; },
          [](const Exponential& d) { return 1.0 / d.rate; },
          [](const Uniform& d) { return 0.5 * (d.a + d.b); },
      },
      m);
}

inline double margin_var(const MarginSpec& m) {
  validate(m);
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  return std::visit(
      detail::overloaded{
          [](const Normal& d) { return d.sigma * d.sigma; },
          [](const StudentT& d) {
            detail::require_domain(d.nu > 2.0, "margin_var: Student t variance requires nu > 2");
            return d.nu / (d.nu - 2.0);
          },
          [](const SkewNormal& d) {
            const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
            return d.omega * d.omega * (1.0 - 2.0 * delta * delta / std::numbers::pi);
          },
          [](const Gumbel& d) { return pi2 * d.scale * d.scale / 6.0; },
          [](const Logistic& d) { return pi2 * d.scale * d.scale / 3.0; },
          [](const Exponential& d) { return 1.0 / (d.rate * d.rate); },
          [](const Uniform& d) { return (d.b - d.a) * (d.b - d.a) / 12.0; },
      },
      m);
}

inline std::string to_string(const MarginSpec& m) {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  return std::visit(detail::overloaded{
                        [&](const Normal& d) { return "normal:" + num(d.mu) + "," + num(d.sigma); },
                        [&](const StudentT& d) { return "t:" + num(d.nu); },
                        [&](const SkewNormal& d) {
                          return "skewnormal:" + num(d.xi) + "," + num(d.omega) + "," + num(d.shape);
                        },
                        [&](const Gumbel& d) { return "gumbel:" + num(d.loc) + "," + num(d.scale); },
                        [&](const Logistic& d) { return "logistic:" + num(d.loc) + "," + num(d.scale); },
                        [&](const Exponential& d) { return "exponential:" + num(d.rate); },
                        [&](const Uniform& d) { return "uniform:" + num(d.a) + "," + num(d.b); },
                    },
                    m);
}

}  // namespace gexp

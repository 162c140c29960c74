#pragma once

// Goodness-of-fit and rank-correlation statistics used to calibrate the
// samplers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "gexp/types.hpp"

namespace gexp::stats {

/// Kendall's tau-b in O(n log n) (Knight's merge-sort algorithm).
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  gexp::detail::require(x.size() == y.size(), "kendall_tau: length mismatch");
  const std::size_t n = x.size();
  gexp::detail::require(n >= 2, "kendall_tau: need at least two observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  auto pairs = [](std::uint64_t run) { return run * (run - 1) / 2; };

  std::uint64_t ties_x = 0;
  std::uint64_t ties_xy = 0;
  {
    std::uint64_t run_x = 1;
    std::uint64_t run_xy = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const bool same_x = x[order[i]] == x[order[i - 1]];
      const bool same_y = y[order[i]] == y[order[i - 1]];
      if (same_x) {
        ++run_x;
        if (same_y) {
          ++run_xy;
        } else {
          ties_xy += pairs(run_xy);
          run_xy = 1;
        }
      } else {
        ties_x += pairs(run_x);
        ties_xy += pairs(run_xy);
        run_x = 1;
        run_xy = 1;
      }
    }
    ties_x += pairs(run_x);
    ties_xy += pairs(run_xy);
  }

  // Merge sort of y in x-order, counting exchanges (discordant pairs).
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t k = lo;
      while (i < mid && j < hi) {
        if (ys[j] < ys[i]) {
          swaps += mid - i;
          buf[k++] = ys[j++];
        } else {
          buf[k++] = ys[i++];
        }
      }
      while (i < mid) buf[k++] = ys[i++];
      while (j < hi) buf[k++] = ys[j++];
    }
    std::swap(ys, buf);
  }

  std::uint64_t ties_y = 0;
  std::uint64_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (ys[i] == ys[i - 1]) {
      ++run;
    } else {
      ties_y += pairs(run);
      run = 1;
    }
  }
  ties_y += pairs(run);

  const double total = static_cast<double>(pairs(n));
  const double numer = total - static_cast<double>(ties_x) - static_cast<double>(ties_y) +
                       static_cast<double>(ties_xy) - 2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt((total - static_cast<double>(ties_x)) * (total - static_cast<double>(ties_y)));
  return denom > 0.0 ? numer / denom : 0.0;
}

inline double kendall_tau(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  return kendall_tau(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                     std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
inline double ks_statistic(std::span<const double> xs, const std::function<double(double)>& cdf) {
  gexp::detail::require(!xs.empty(), "ks_statistic: empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_statistic(const Eigen::Ref<const Vector>& xs, const std::function<double(double)>& cdf) {
  return ks_statistic(std::span<const double>(xs.data(), static_cast<std::size_t>(xs.size())), cdf);
}

/// Asymptotic KS critical value c(level) / sqrt(n) for level 0.05 or 0.01.
inline double ks_critical(std::size_t n, double level) {
  const double c = (level <= 0.01) ? 1.628 : 1.358;
  return c / std::sqrt(static_cast<double>(n));
}

inline double mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace gexp::stats

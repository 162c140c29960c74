#pragma once

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace gexp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline bool all_finite(const Eigen::Ref<const Vector>& v) { return v.allFinite(); }

inline void require(bool condition, const char* what) {
  if (!condition) throw std::invalid_argument(what);
}

inline void require_domain(bool condition, const char* what) {
  if (!condition) throw std::domain_error(what);
}

}  // namespace detail

/// Direction/magnitude vector in the open unit ball. The norm bound is strict
/// and has no tolerance: 0.99999 is valid, 1.0 is not.
class Index {
 public:
  explicit Index(Vector values) : values_(std::move(values)) {
    detail::require(values_.size() >= 1, "Index: dimension must be >= 1");
    detail::require(values_.allFinite(), "Index: entries must be finite");
    detail::require_domain(values_.norm() < 1.0, "Index: norm must be < 1");
  }

  /// Zero index of dimension d.
  static Index zero(Eigen::Index d) { return Index(Vector::Zero(d)); }

  static Index scalar(double u) { return Index(Vector::Constant(1, u)); }

  [[nodiscard]] const Vector& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return values_.size(); }
  [[nodiscard]] double norm() const { return values_.norm(); }
  [[nodiscard]] double operator[](Eigen::Index k) const { return values_[k]; }

  [[nodiscard]] Index operator-() const { return Index(-values_); }

 private:
  Vector values_;
};

/// n x d matrix of observations; row i is the i-th d-dimensional point.
/// An empty sample (n = 0) is representable so that simulators can return it;
/// estimators reject it.
class Sample {
 public:
  Sample() = default;

  explicit Sample(Matrix rows) : rows_(std::move(rows)) {
    detail::require(rows_.cols() >= 1, "Sample: dimension must be >= 1");
    detail::require(rows_.allFinite(), "Sample: observations must be finite");
  }

  static Sample empty(Eigen::Index d) { return Sample(Matrix(0, d)); }

  [[nodiscard]] const Matrix& rows() const noexcept { return rows_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return rows_.rows(); }
  [[nodiscard]] Eigen::Index dim() const noexcept { return rows_.cols(); }
  [[nodiscard]] bool empty() const noexcept { return rows_.rows() == 0; }
  [[nodiscard]] auto row(Eigen::Index i) const { return rows_.row(i).transpose(); }
  [[nodiscard]] auto column(Eigen::Index j) const { return rows_.col(j); }

  [[nodiscard]] Vector mean() const {
    detail::require(!empty(), "Sample: mean of an empty sample");
    return rows_.colwise().mean().transpose();
  }

  /// Sample restricted to the given columns, in order.
  [[nodiscard]] Sample columns(std::initializer_list<Eigen::Index> cols) const {
    Matrix out(rows_.rows(), static_cast<Eigen::Index>(cols.size()));
    Eigen::Index k = 0;
    for (auto c : cols) {
      detail::require(c >= 0 && c < dim(), "Sample: column out of range");
      out.col(k++) = rows_.col(c);
    }
    return Sample(std::move(out));
  }

 private:
  Matrix rows_ = Matrix(0, 1);
};

}  // namespace gexp

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pathlift {

/// Path in R^d sampled on the dyadic grid t_k = horizon * k / 2^depth,
/// k = 0..2^depth. Values are stored point-major: coordinate i of point k
/// lives at values()[k * dim() + i].
class DyadicPath {
public:
  DyadicPath() = default;

  /// Throws InvalidInput unless values.size() == (2^depth + 1) * dim, all
  /// values are finite, dim >= 1 and horizon > 0.
  DyadicPath(int depth, std::size_t dim, std::vector<double> values, double horizon = 1.0);

  static DyadicPath scalar(int depth, std::vector<double> values, double horizon = 1.0);

  /// Samples f(t) at every grid time; f returns a point of dimension dim.
  static DyadicPath sample(int depth, std::size_t dim,
                           const std::function<std::vector<double>(double)>& f,
                           double horizon = 1.0);

  int depth() const noexcept { return depth_; }
  std::size_t dim() const noexcept { return dim_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return (std::size_t{1} << depth_) + 1; }

  double time(std::size_t k) const noexcept {
    return horizon_ * static_cast<double>(k) / static_cast<double>(std::size_t{1} << depth_);
  }

  std::span<const double> point(std::size_t k) const noexcept {
    return {values_.data() + k * dim_, dim_};
  }
  /// First coordinate of point k; the natural accessor for d = 1.
  double operator[](std::size_t k) const noexcept { return values_[k * dim_]; }

  std::span<const double> values() const noexcept { return values_; }

  /// Euclidean distance between grid points i and j.
  double distance(std::size_t i, std::size_t j) const noexcept {
    const double* a = values_.data() + i * dim_;
    const double* b = values_.data() + j * dim_;
    if (dim_ == 1) return std::abs(*a - *b);
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(s);
  }

  /// Same values on [0,1]; seminorms of the result relate to the original
  /// through the factors in path_norms.hpp.
  DyadicPath with_unit_horizon() const;

  /// Piecewise-linear interpolation onto a finer dyadic grid (new_depth >= depth).
  DyadicPath refined(int new_depth) const;

  /// Keeps every 2^(depth - new_depth)-th point (new_depth <= depth).
  DyadicPath coarsened(int new_depth) const;

  friend bool operator==(const DyadicPath&, const DyadicPath&) = default;

private:
  int depth_ = 0;
  std::size_t dim_ = 1;
  double horizon_ = 1.0;
  std::vector<double> values_{0.0, 0.0};
};

}  // namespace pathlift

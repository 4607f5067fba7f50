#include "pathlift/dyadic_path.hpp"

#include <cmath>
#include <string>

#include "pathlift/error.hpp"

namespace pathlift {

namespace {

constexpr int kMaxDepth = 30;

}  // namespace

DyadicPath::DyadicPath(int depth, std::size_t dim, std::vector<double> values, double horizon)
    : depth_(depth), dim_(dim), horizon_(horizon), values_(std::move(values)) {
  if (depth < 0 || depth > kMaxDepth) throw InvalidInput("path depth must lie in [0, 30]");
  if (dim == 0) throw InvalidInput("path dimension must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidInput("path horizon must be positive and finite");
  if (values_.size() != size() * dim_)
    throw InvalidInput("path has " + std::to_string(values_.size()) + " values, expected (2^" +
                       std::to_string(depth) + " + 1) * " + std::to_string(dim));
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("path values must be finite");
}

DyadicPath DyadicPath::scalar(int depth, std::vector<double> values, double horizon) {
  return DyadicPath(depth, 1, std::move(values), horizon);
}

DyadicPath DyadicPath::sample(int depth, std::size_t dim, const std::function<std::vector<double>(double)>& f,
                              double horizon) {
  if (depth < 0 || depth > kMaxDepth) throw InvalidInput("path depth must lie in [0, 30]");
  const std::size_t n = (std::size_t{1} << depth) + 1;
  std::vector<double> values;
  values.reserve(n * dim);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = horizon * static_cast<double>(k) / static_cast<double>(n - 1);
    const auto x = f(t);
    if (x.size() != dim) throw InvalidInput("sampled point has the wrong dimension");
    values.insert(values.end(), x.begin(), x.end());
  }
  return DyadicPath(depth, dim, std::move(values), horizon);
}

DyadicPath DyadicPath::with_unit_horizon() const { return DyadicPath(depth_, dim_, values_, 1.0); }

DyadicPath DyadicPath::refined(int new_depth) const {
  if (new_depth < depth_) throw InvalidInput("refined depth must not be smaller than the current depth");
  if (new_depth > kMaxDepth) throw InvalidInput("path depth must lie in [0, 30]");
  const std::size_t factor = std::size_t{1} << (new_depth - depth_);
  const std::size_t n = (std::size_t{1} << new_depth) + 1;
  std::vector<double> out(n * dim_);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t left = k / factor;
    const std::size_t off = k % factor;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double a = values_[left * dim_ + c];
      if (off == 0) {
        out[k * dim_ + c] = a;
      } else {
        const double b = values_[(left + 1) * dim_ + c];
        const double w = static_cast<double>(off) / static_cast<double>(factor);
        out[k * dim_ + c] = (1.0 - w) * a + w * b;
      }
    }
  }
  return DyadicPath(new_depth, dim_, std::move(out), horizon_);
}

DyadicPath DyadicPath::coarsened(int new_depth) const {
  if (new_depth < 0 || new_depth > depth_) throw InvalidInput("coarsened depth must lie in [0, depth]");
  const std::size_t stride = std::size_t{1} << (depth_ - new_depth);
  const std::size_t n = (std::size_t{1} << new_depth) + 1;
  std::vector<double> out;
  out.reserve(n * dim_);
  for (std::size_t k = 0; k < n; ++k) {
    const auto pt = point(k * stride);
    out.insert(out.end(), pt.begin(), pt.end());
  }
  return DyadicPath(new_depth, dim_, std::move(out), horizon_);
}

}  // namespace pathlift

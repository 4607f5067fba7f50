#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library; every routine is a direct transcription of a definition
// or a closed form, deliberately written the slow way.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

/// min over all bijections s of (1/N) sum_i |x_i - y_{s(i)}|^p.
inline double brute_force_wpp(const std::vector<double>& x, const std::vector<double>& y, double p) {
  std::vector<std::size_t> perm(y.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += std::pow(std::abs(x[i] - y[perm[i]]), p);
    best = std::min(best, c / static_cast<double>(x.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// max over all dissections of sum |X_{t_{i+1}} - X_{t_i}|^p, enumerating
/// every subset of interior grid points (scalar values).
inline double brute_force_pvar_pp(const std::vector<double>& v, double p) {
  const std::size_t interior = v.size() - 2;
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << interior); ++mask) {
    double s = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      const bool keep = i == v.size() - 1 || ((mask >> (i - 1)) & 1u);
      if (!keep) continue;
      s += std::pow(std::abs(v[i] - v[prev]), p);
      prev = i;
    }
    best = std::max(best, s);
  }
  return best;
}

/// max over grid pairs of |X_v - X_u| / (v - u)^gamma on [0,1] (scalar values).
inline double brute_force_holder(const std::vector<double>& v, double gamma, double horizon = 1.0) {
  const double h = horizon / static_cast<double>(v.size() - 1);
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, std::abs(v[j] - v[i]) / std::pow(h * static_cast<double>(j - i), gamma));
  return best;
}

/// sum_{m=0}^{M} 2^{m(alpha p - 1)} sum_k |X_{k+1}^m - X_k^m|^p straight from the definition.
inline double besov_energy(const std::vector<double>& v, double alpha, double p) {
  const std::size_t last = v.size() - 1;
  int depth = 0;
  while ((std::size_t{1} << depth) < last) ++depth;
  double total = 0.0;
  for (int m = 0; m <= depth; ++m) {
    const std::size_t stride = last >> m;
    double level = 0.0;
    for (std::size_t k = 0; k + stride <= last; k += stride) level += std::pow(std::abs(v[k + stride] - v[k]), p);
    total += std::pow(2.0, m * (alpha * p - 1.0)) * level;
  }
  return total;
}

/// Besov energy of t -> t truncated at level M: sum_m 2^{-m p (1 - alpha)}.
inline double linear_besov_energy(double alpha, double p, int depth) {
  double s = 0.0;
  for (int m = 0; m <= depth; ++m) s += std::pow(2.0, -m * p * (1.0 - alpha));
  return s;
}

/// Exact W^{alpha,p} energy of t -> t on [0,1]: 2 / (e (e + 1)), e = p - alpha p.
inline double linear_frac_sobolev_energy(double alpha, double p) {
  const double e = p - alpha * p;
  return 2.0 / (e * (e + 1.0));
}

/// (32 (alpha p + 1) / (alpha p - 1))^{1/p}.
inline double grr_constant(double alpha, double p) {
  return std::pow(32.0 * (alpha * p + 1.0) / (alpha * p - 1.0), 1.0 / p);
}

/// E|Z|^4 for Z ~ N(0, 1).
inline constexpr double kGaussFourthMoment = 3.0;

/// Closed-form S-HE marginal energy: W_4^4(mu_s, mu_t) = 3 ((sqrt t - sqrt s)^2 + (t - s))^2,
/// summed with weights 2^{m(alpha p - 1)} over levels 0..depth (p = 4 only).
inline double she_marginal_energy_p4(double alpha, int depth) {
  const double p = 4.0;
  double total = 0.0;
  for (int m = 0; m <= depth; ++m) {
    const double dt = std::pow(2.0, -m);
    double level = 0.0;
    for (std::size_t k = 0; k < (std::size_t{1} << m); ++k) {
      const double s = dt * static_cast<double>(k), t = s + dt;
      const double ds = std::sqrt(t) - std::sqrt(s);
      const double v = ds * ds + dt;
      level += kGaussFourthMoment * v * v;
    }
    total += std::pow(2.0, m * (alpha * p - 1.0)) * level;
  }
  return total;
}

/// Closed-form expected besov energy of X = B + W (p = 4): increments are
/// N(0, 2 dt), so E|dX|^4 = 3 (2 dt)^2.
inline double she_independent_energy_p4(double alpha, int depth) {
  const double p = 4.0;
  double total = 0.0;
  for (int m = 0; m <= depth; ++m) {
    const double dt = std::pow(2.0, -m);
    total += std::pow(2.0, m * (alpha * p - 1.0)) * std::pow(2.0, m) * kGaussFourthMoment * (2.0 * dt) * (2.0 * dt);
  }
  return total;
}

/// Philox4x32-10 known-answer vectors (counter, key, output) from the
/// Random123 distribution.
struct PhiloxVector {
  std::uint32_t ctr[4];
  std::uint32_t key[2];
  std::uint32_t out[4];
};

inline constexpr PhiloxVector kPhiloxVectors[] = {
    {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
    {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
     {0xffffffff, 0xffffffff},
     {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
    {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
     {0xa4093822, 0x299f31d0},
     {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}},
};

/// Standard normal quantile by bisection on erfc; slow but independent.
inline double normal_quantile(double u) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Least-squares slope of y on x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle

#include "pathlift/rng.hpp"

#include <cmath>
#include <numbers>

namespace pathlift {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) noexcept {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

inline double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Counter layout: (index_lo, index_hi, stream_lo, lane ^ (stream_hi << 16));
// key = seed. Distinct for lanes and stream_hi below 2^16.
std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index, std::uint32_t lane) const noexcept {
  const auto stream_hi = static_cast<std::uint32_t>(stream_ >> 32);
  return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                     static_cast<std::uint32_t>(stream_), lane ^ (stream_hi << 16)},
                    {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

double CounterRng::uniform(std::uint64_t index, std::uint32_t lane) const noexcept {
  const auto b = block(index, lane);
  return open_unit(join(b[0], b[1]));
}

double CounterRng::normal(std::uint64_t index, std::uint32_t lane) const noexcept {
  const auto b = block(index, lane);
  const double u1 = open_unit(join(b[0], b[1]));
  const double u2 = open_unit(join(b[2], b[3]));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t bound, std::uint64_t index, std::uint32_t lane) const noexcept {
  const auto b = block(index, lane);
  // high word of the 128-bit product x * bound
  const std::uint64_t x = join(b[0], b[1]);
  const std::uint64_t xl = x & 0xffffffffu, xh = x >> 32;
  const std::uint64_t bl = bound & 0xffffffffu, bh = bound >> 32;
  const std::uint64_t ll = xl * bl, lh = xl * bh, hl = xh * bl, hh = xh * bh;
  const std::uint64_t mid = (ll >> 32) + (lh & 0xffffffffu) + (hl & 0xffffffffu);
  return hh + (lh >> 32) + (hl >> 32) + (mid >> 32);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  const auto b = philox4x32(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu, 0u},
      {static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32)});
  return join(b[0], b[1]);
}

}  // namespace pathlift

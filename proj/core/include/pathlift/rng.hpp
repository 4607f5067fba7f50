#pragma once

#include <array>
#include <cstdint>

namespace pathlift {

/// Philox4x32-10 block function: a keyed bijection on 128-bit counters.
/// Every random quantity in the library is a pure function of
/// (seed, stream, counter), so draws are reproducible and independent of
/// evaluation order or threading.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Stateless counter-based generator for one (seed, stream) pair.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Raw Philox block for counter (index, lane).
  std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t lane = 0) const noexcept;
  /// Uniform on the open interval (0,1) with 53-bit resolution.
  double uniform(std::uint64_t index, std::uint32_t lane = 0) const noexcept;
  /// Standard normal by Box-Muller from one block.
  double normal(std::uint64_t index, std::uint32_t lane = 0) const noexcept;
  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound, std::uint64_t index, std::uint32_t lane = 0) const noexcept;

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Seed of scenario i under base_seed: the first two words of
/// philox4x32(ctr = (i_lo, i_hi, 0x5eed, 0), key = (base_lo, base_hi)).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept;

}  // namespace pathlift

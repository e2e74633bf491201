#pragma once

#include <array>
#include <cstdint>

namespace rsmfg {

/// Philox4x32-10 block: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Independent draw streams of one seed.
enum class Stream : std::uint32_t {
  diffusion = 0,
  initial_state = 1,
  cost_paths = 2,
};

/// Stateless generator: every draw is a pure function of (seed, stream, id, step).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform in the open interval (0, 1).
  double uniform(Stream stream, std::uint64_t id, std::uint64_t step) const;

  /// Standard normal by Box-Muller on one Philox block.
  double normal(Stream stream, std::uint64_t id, std::uint64_t step) const;

 private:
  std::array<std::uint32_t, 4> block(Stream stream, std::uint64_t id, std::uint64_t step) const;

  std::uint64_t seed_;
};

/// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace rsmfg

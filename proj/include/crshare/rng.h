#pragma once

#include <cstdint>
#include <random>

namespace crshare {

// Independent random streams per purpose (and per provider where relevant),
// so that changing one provider's traffic leaves the others' draws intact.
enum class StreamPurpose : std::uint32_t {
  kRates = 1,
  kArrivals = 2,
  kHolding = 3,
  kPlacement = 4,
  kChannels = 5,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint32_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), index};
  return std::mt19937_64(seq);
}

}  // namespace crshare

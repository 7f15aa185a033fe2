#pragma once

// Counter-based 64-bit generator (splitmix64). Every draw is a pure function
// of an integer counter, so sequences are bit-reproducible on any platform
// and replication streams can be derived without shared state.

#include <algorithm>
#include <cstdint>
#include <vector>

namespace countmass {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept { return mix64(state_ += golden_gamma); }

  // Uniform on [0,1) with 53 random bits; 1.0 is never returned.
  double next_double() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Independent stream for one Monte Carlo replication. Feeding the replication
// index through the finalizer twice decorrelates (seed, index) pairs even for
// adjacent indices.
inline SplitMix64 replication_stream(std::uint64_t seed, std::uint64_t replication) noexcept {
  return SplitMix64(mix64(seed ^ mix64(replication + golden_gamma)));
}

// Inverse-CDF draw: smallest index with cdf[i] > u. The caller guarantees cdf
// is nondecreasing with back() == 1.0, so the result is always in range.
inline std::uint32_t sample_cdf(const std::vector<double>& cdf, double u) noexcept {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;  // u beyond back() cannot happen with u < 1, kept defensive
  return static_cast<std::uint32_t>(it - cdf.begin());
}

}  // namespace countmass

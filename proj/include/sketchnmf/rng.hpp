#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace sketchnmf {

/// Identifier recorded in manifests so draws can be reproduced elsewhere.
inline constexpr std::string_view kRngName = "splitmix64-ctr/1";

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: the i-th output of (seed, stream) is
/// splitmix64(key + i * golden), with key derived from both. Normals come from
/// Box-Muller on consecutive uniform pairs.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ULL + 1)) {}

  std::uint64_t next_u64() noexcept {
    return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++);
  }

  /// Uniform on (0, 1]; never returns 0 so log() below is safe.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sketchnmf

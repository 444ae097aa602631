#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace htwb {

/// All randomness in the project flows through SplitMix64. The generator is
/// trivially seedable, has no state beyond one 64-bit counter, and produces
/// identical streams on every platform, which std::* distributions do not
/// guarantee. Artifacts record the algorithm id below next to their seed.
inline constexpr std::string_view kRngAlgorithm = "splitmix64";

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Random access into a seeded stream: word k of the stream for `seed`.
/// Used by pattern campaigns so that any single pattern can be regenerated
/// later without re-running the whole campaign.
constexpr std::uint64_t stream_word(std::uint64_t seed, std::uint64_t k) {
  return detail::splitmix_finalize(seed + (k + 1) * detail::kGolden);
}

/// Mixes a label into a seed so that independent consumers of one user seed
/// (policy init, environment stream, minibatch shuffling, ...) get
/// decorrelated streams.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return detail::splitmix_finalize(seed ^ detail::splitmix_finalize(stream_id));
}

class SplitMix64 {
public:
  constexpr explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += detail::kGolden;
    return detail::splitmix_finalize(state_);
  }

  /// Uniform in [0, bound) without modulo bias (rejection on the tail).
  std::uint64_t next_below(std::uint64_t bound) {
    // bound == 0 would be a caller bug; keep the check cheap.
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 significant bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool next_bool() { return (next() >> 63) != 0; }

  /// Standard normal via Box-Muller; two uniforms per call, second value
  /// discarded to keep the state trajectory independent of call parity.
  double next_gaussian();

  constexpr std::uint64_t state() const { return state_; }

private:
  std::uint64_t state_;
};

inline double SplitMix64::next_gaussian() {
  double u1 = next_double();
  const double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard, probability 2^-53
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace htwb

#pragma once

#include <cstdint>

namespace sparsevr {

// Seedable, splittable counter-free generator built on the splitmix64 mixer.
// Every solver draws from streams derived with derive_stream(seed, a, b, c);
// the convention is (seed, restart, epoch, worker) with one draw per inner
// iteration, so single-thread runs of different engines consume identical
// sequences and their traces can be compared bit for bit.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) via the multiply-shift reduction. The bias for
  // bounds below 2^40 is far under 2^-20 per draw, which is irrelevant here;
  // what matters is that the mapping is platform-independent.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-1, 1).
  double next_symmetric() { return 2.0 * next_double() - 1.0; }

  bool next_bool() { return (next_u64() & 1ULL) != 0; }

 private:
  std::uint64_t state_ = 0;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Stream used to pre-draw the snapshot index t within an epoch.
inline constexpr std::uint64_t kSnapshotStream = 0xFFFF'0001ULL;
// Stream used by the perturbed-iterate harness for mask draws.
inline constexpr std::uint64_t kMaskStream = 0xFFFF'0002ULL;
// Stream tag for the SAGA-family engines: (seed, pass chunk, worker, tag).
inline constexpr std::uint64_t kSagaStream = 0xFFFF'0003ULL;

inline Rng derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  std::uint64_t s = detail::mix64(seed ^ detail::mix64(a));
  s = detail::mix64(s ^ detail::mix64(b));
  s = detail::mix64(s ^ detail::mix64(c));
  return Rng(s);
}

}  // namespace sparsevr

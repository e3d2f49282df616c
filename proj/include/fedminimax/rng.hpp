#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "fedminimax/error.hpp"

namespace fedminimax {

/// Domain tags keep streams for different consumers disjoint.
enum class StreamPurpose : std::uint64_t {
  noise = 1,
  minibatch = 2,
  problem = 3,
  data = 4,
  test = 5,
};

/// Identifies one independent random stream. Streams are derived purely from
/// the key, so client scheduling order never changes what a client draws.
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t client = 0;
  std::uint64_t round = 0;
  std::uint64_t step = 0;
  StreamPurpose purpose = StreamPurpose::noise;
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_key(const StreamKey& k) {
  std::uint64_t h = mix64(k.master + kGolden);
  h = mix64(h ^ (k.client + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (k.round + 0x85157AF5D2A3B1C3ULL));
  h = mix64(h ^ (k.step + 0xD6E8FEB86659FD93ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(k.purpose) + 0xA0761D6478BD642FULL));
  return h;
}

}  // namespace detail

/// Counter-based stream: the i-th output is mix(seed + i * golden). Value
/// type; copying a stream forks it at the current position.
class Stream {
 public:
  explicit Stream(const StreamKey& key) : seed_(detail::hash_key(key)) {}
  static Stream from_seed(std::uint64_t seed) { return Stream(StreamKey{seed, 0, 0, 0, StreamPurpose::data}); }

  std::uint64_t next_u64() { return detail::mix64(seed_ + (++counter_) * detail::kGolden); }

  // Uniform in the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n) by the multiply-high reduction.
  std::uint64_t index(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("Stream::index: empty range");
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
  }

  // Standard normal (Box–Muller, both variates used).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Gamma(shape, 1) by Marsaglia–Tsang; shape < 1 uses the boost U^{1/shape}.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw InvalidArgument("Stream::gamma: shape must be > 0");
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fedminimax

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rig {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// One reproducible random stream.  Replicate r of a run with master seed m
/// always uses RandomStream::derive(m, r), so results do not depend on how
/// replicates are distributed over threads.  All floating-point draws are
/// built from raw engine words (never std::*_distribution, whose output is
/// implementation-defined), so a seed pins the byte-exact sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derive(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t s = master_seed;
    (void)splitmix64_next(s);
    s ^= 0x632BE59BD9B4E019ull * (stream_id + 1);
    return RandomStream(splitmix64_next(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to pass to log().
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes exactly two words per call.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  static constexpr std::int64_t skip_forever = std::int64_t{1} << 62;

  /// Number of failures before the first success of iid Bernoulli(p) trials.
  /// Returns skip_forever when p <= 0 or the jump exceeds any index range we use.
  std::int64_t geometric_skips(double p) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return skip_forever;
    const double g = std::floor(std::log(uniform_pos()) / std::log1p(-p));
    if (!(g < static_cast<double>(skip_forever))) return skip_forever;
    return static_cast<std::int64_t>(g);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rig

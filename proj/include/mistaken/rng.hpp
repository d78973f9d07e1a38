#pragma once

// Deterministic RNG for every randomized decision in the library. All streams
// derive from explicit 64-bit seeds, so results are bit-identical across
// platforms and runs. Standard-library distributions are avoided on purpose:
// their output is implementation-defined.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mistaken {

// splitmix64 stepping; full 64-bit period, passes the usual batteries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of mantissa.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], both ends inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool next_bool(double p_true = 0.5) { return next_double() < p_true; }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Index into an unnormalized weight vector.
  std::size_t next_weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = next_double() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  // Fisher-Yates, high to low.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(next_int(0, static_cast<std::int64_t>(i) - 1));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent substream seed from (base, tag).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  Rng r(base ^ (0x632be59bd9b4e019ULL * (tag + 0x9e3779b97f4a7c15ULL)));
  r.next_u64();
  return r.next_u64();
}

}  // namespace mistaken

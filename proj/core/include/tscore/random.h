#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace tscore {

// Portable seeded randomness. std::mt19937_64 has a standardized output
// sequence, but the <random> distributions do not, so bounded draws are
// done here by rejection sampling on the raw 64-bit stream.
//
// Stream splitting: the generator for sub-task `i` under base seed `s` is
// seeded with splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15). Every tree of a
// forest and every cross-validation fold draws from its own stream, so the
// result never depends on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed + (stream + 1) * 0x9E3779B97F4A7C15ULL);
  }

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(stream_seed(seed, stream));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tscore

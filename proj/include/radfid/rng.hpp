#pragma once

#include <cmath>
#include <cstdint>

namespace radfid {

// SplitMix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream key from a parent key and a tag.
inline std::uint64_t derive_stream(std::uint64_t key, std::uint64_t tag) {
  return mix64(key ^ mix64(tag));
}

inline std::uint64_t derive_stream(std::uint64_t key, std::uint64_t tag_a, std::uint64_t tag_b) {
  return derive_stream(derive_stream(key, tag_a), tag_b);
}

// Counter-mode SplitMix64: draw i is mix64(key + i * golden), so a stream is a
// pure function of (key, counter). Streams for cases/operators are derived via
// derive_stream, never by sharing a counter, which keeps every stage's draws
// independent of evaluation order and worker count.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  // [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int v = lo + static_cast<int>(uniform01() * span);
    return v > hi ? hi : v;
  }

  // Standard normal, Box-Muller cosine branch; consumes exactly two draws.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace radfid

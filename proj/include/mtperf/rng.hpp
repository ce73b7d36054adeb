#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace mtperf {

// All randomness in the library flows through this generator. It is specified
// bit-for-bit (no standard-library distributions or shuffles) so that every
// result is reproducible across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). Modulo bias is negligible for the small n used
  // here and keeps the stream layout trivial to reproduce elsewhere.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; first factor drawn from (0, 1] so the
  // logarithm is always finite.
  double normal() {
    double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a over arbitrary bytes; used to derive independent, reproducible
// sub-stream seeds from string labels.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for the sub-stream identified by `material`, bound to a master seed.
// The master seed is appended little-endian so textual labels can never
// collide with it.
inline std::uint64_t stream_seed(std::uint64_t master_seed,
                                 std::string_view material) {
  std::string buf(material);
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<char>((master_seed >> (8 * i)) & 0xFF));
  }
  return fnv1a64(buf);
}

// Fisher-Yates permutation of [0, n) driven by the supplied stream.
inline std::vector<std::size_t> shuffled_indices(std::size_t n,
                                                 SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

// Splits [0, n) into k contiguous folds of a (shuffled) permutation; the
// first n % k folds receive one extra element so sizes differ by at most 1.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n,
                                                        std::size_t k,
                                                        SplitMix64& rng,
                                                        bool shuffle) {
  std::vector<std::size_t> idx;
  if (shuffle) {
    idx = shuffled_indices(n, rng);
  } else {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t base = n / k, extra = n % k, pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(idx.begin() + pos, idx.begin() + pos + size);
    pos += size;
  }
  return folds;
}

}  // namespace mtperf

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace kglp {

// Deterministic splitmix64 generator. Every random decision in the project
// flows from one top-level seed through named substreams, so components stay
// reproducible independently of each other and of the platform's <random>
// distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_(seed), state_(seed) {}

  // Substream derived from the construction seed, independent of how many
  // draws this stream has made.
  Rng stream(std::string_view name) const {
    return Rng(mix(base_ ^ fnv1a(name)));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Unbiased draw in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x, r;
    do {
      x = next();
      r = x % n;
    } while (x - r > ~std::uint64_t{0} - (n - 1));
    return r;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

  // [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t base_;
  std::uint64_t state_;
};

}  // namespace kglp

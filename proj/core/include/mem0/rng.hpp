#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace mem0 {

// Counter-based splittable generator (splitmix64 finalizer). Chosen so that
// traces and training runs reproduce bit-for-bit across platforms; the
// algorithm is fully specified here and has no global state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound) via rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the spare value.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives an independent stream seed from (base, tag, index). Folding the tag
// bytes through the finalizer keeps differently-tagged streams (for example
// demo seeds versus evaluation seeds) disjoint by construction.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index) {
  SplitMix64 g(base);
  std::uint64_t h = g.next();
  for (unsigned char c : tag) {
    SplitMix64 t(h ^ (0x100ull + c));
    h = t.next();
  }
  SplitMix64 f(h ^ (index * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull));
  return f.next();
}

}  // namespace mem0

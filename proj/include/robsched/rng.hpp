#pragma once
#include <cstdint>
#include <random>

namespace robsched {

// splitmix64; used to derive independent child seeds so that parallel replications
// do not depend on call order.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = splitmix64(base ^ 0x632be59bd9b4e019ull);
  s = splitmix64(s ^ splitmix64(a));
  s = splitmix64(s ^ splitmix64(b ^ 0x9e6c63d0876a9a47ull));
  s = splitmix64(s ^ splitmix64(c ^ 0xd1b54a32d192ed03ull));
  return s;
}

// Deterministic uniform generator. Avoids std::uniform_real_distribution, whose output
// is not pinned by the standard; (x >> 11) * 2^-53 gives identical streams everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound) by rejection; unbiased and reproducible.
  uint64_t uniform_index(uint64_t bound) {
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % bound;
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(uniform_index(static_cast<uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace robsched

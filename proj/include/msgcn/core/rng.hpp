#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace msgcn {

// Deterministic 64-bit generator (splitmix64). Used everywhere randomness is
// needed so runs reproduce bit-for-bit across platforms; std::mt19937 plus
// the standard distributions would tie results to a particular stdlib.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Multiply-shift keeps the draw independent of
  // stdlib distribution internals; the bias for desk-scale n is negligible.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >>
                            64);
  }

  // Stable sub-seed derivation for independent component streams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (salt * 0xD6E8FEB86659FD93ULL + 0xA5A5A5A5A5A5A5A5ULL));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
    int j = rng.uniform_int(i + 1);
    std::swap(items[i], items[static_cast<std::size_t>(j)]);
  }
}

}  // namespace msgcn

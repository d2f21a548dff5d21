#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace infocp {

// Self-contained counter-seeded generator (xoshiro256++ with splitmix64
// seeding). The standard <random> distributions are implementation-defined,
// which would break the byte-identical-report contract across toolchains, so
// all sampling goes through this.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Independent stream for one replication; results do not depend on how
  // replications are scheduled across threads.
  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t sm = master_seed;
    const std::uint64_t base = splitmix64(sm);
    std::uint64_t im = base ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return Rng(splitmix64(im));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1].
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Index in [0, probs.size()) with the given probabilities (need not be
  // exactly normalized; the last class absorbs rounding).
  std::size_t categorical(const std::vector<double>& probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      acc += probs[k];
      if (u <= acc) return k;
    }
    return probs.empty() ? throw std::invalid_argument("empty categorical") : probs.size() - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace infocp

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace cyclesem {

// Counter-based pseudo-random generator built on the splitmix64 finalizer.
// Output i of a stream with key k is mix(k + (i+1)*GOLDEN), a pure function
// of (key, i), so any record/stream can be regenerated independently and the
// sequence is identical on every platform. Streams are derived from a seed
// plus tag words (record index, purpose id, ...) by folding each tag through
// the same mixer. Never replace this with the platform default RNG: dataset
// bytes are contractually a pure function of the seed.
class CounterRng {
  public:
    static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;

    static uint64_t mix(uint64_t z) {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    explicit CounterRng(uint64_t seed) : key_(mix(seed)) {}

    CounterRng(uint64_t seed, std::initializer_list<uint64_t> tags) : key_(mix(seed)) {
        for (uint64_t t : tags) key_ = mix(key_ ^ (t + kGolden));
    }

    uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

    // Uniform in (0,1), 53-bit mantissa, never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // i in [0, n)
    uint64_t below(uint64_t n) { return next_u64() % n; }

    // Box-Muller; one fresh pair of uniforms per call keeps draws independent
    // of call parity.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    uint64_t key() const { return key_; }

  private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

// Purpose tags for derived streams. Keep stable: they are part of the
// dataset/checkpoint byte contract.
enum RngStream : uint64_t {
    kStreamHealthy = 1,
    kStreamNoise = 2,
    kStreamLesion = 3,
    kStreamInit = 4,
    kStreamShuffle = 5,
};

}  // namespace cyclesem

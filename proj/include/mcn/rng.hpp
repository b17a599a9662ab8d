#pragma once

#include <cmath>
#include <cstdint>

namespace mcn {

// SplitMix64 stream. One instance per UE, derived from (seed, stream id),
// so generation order never depends on thread scheduling.
class Rng {
public:
    Rng() : state_(0x9e3779b97f4a7c15ULL) {}
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        // Avalanche the stream id before folding it into the seed; seeding
        // with seed + k*stream would make the streams shifted copies of one
        // master sequence.
        std::uint64_t z = mix64(stream + 0x9e3779b97f4a7c15ULL);
        return Rng(mix64(seed ^ z) + z);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Exponential with rate lambda (> 0).
    double next_exponential(double lambda) {
        double u;
        do {
            u = next_double();
        } while (u <= 0.0);
        return -std::log(u) / lambda;
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace mcn

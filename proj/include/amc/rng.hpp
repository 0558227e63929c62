#ifndef AMC_RNG_HPP
#define AMC_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace amc {

// Deterministic, portable random stream ("AMC-RNG v1").
//
// Generator: xoshiro256** seeded through splitmix64. Child streams are
// derived from the parent's seed plus an FNV-1a hash of a purpose tag and
// an index, so every stage of the pipeline (payload, shuffle, corruption,
// noise, ...) owns an independent, reproducible stream. Floating point
// draws use the top 53 bits; normal draws use Box-Muller. All of this is
// fixed by the RNG version and must not change without bumping it.

inline constexpr std::uint32_t kRngVersion = 1;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }

    // Independent stream for a named purpose. Same (seed, tag, index)
    // always yields the same stream, regardless of draw position.
    Rng child(std::string_view tag, std::uint64_t index = 0) const {
        std::uint64_t sm = seed_ ^ fnv1a64(tag);
        std::uint64_t mixed = splitmix64(sm);
        sm = mixed ^ (index + 0x9E3779B97F4A7C15ull);
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, bound), bound > 0, rejection sampled.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    std::uint8_t next_byte() { return static_cast<std::uint8_t>(next_u64() >> 56); }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0) u1 = 0x1.0p-53;
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
};

} // namespace amc

#endif // AMC_RNG_HPP

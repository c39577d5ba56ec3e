#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ppd {

// Every random choice in the toolkit flows through this generator so that
// results are reproducible bit-for-bit from a written-down seed, independent
// of platform and standard library.
inline constexpr const char* kPrngName = "xoshiro256**";

// SplitMix64 step: maps a 64-bit state to a well-mixed output. Used for
// seeding xoshiro and for deriving sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a, used to hash string identifiers into seed material.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro256** by Blackman & Vigna, seeded through SplitMix64.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] ^= rotl(state_[1], 45);
        return result;
    }

    // Uniform double in [0,1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0,n), n >= 1, by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> state_{};
};

// Deterministic fan-out of one master seed into per-purpose sub-seeds.
// Documented scheme: fold the FNV-1a hash of the purpose tag and the two
// numeric arguments into the state one at a time, taking a SplitMix64
// output after each fold.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = master ^ fnv1a64(tag);
    std::uint64_t out = splitmix64(s);
    s ^= a;
    out ^= splitmix64(s);
    s ^= b;
    out ^= splitmix64(s);
    return out;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::string_view id) {
    return derive_seed(master, tag, fnv1a64(id));
}

} // namespace ppd

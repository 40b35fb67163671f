#pragma once

#include <cstdint>
#include <random>

#include "otforge/bitstring.hpp"

namespace otforge {

// Deterministic random stream. mt19937_64 output is fully specified by the
// standard and all draws below avoid std::distributions (whose algorithms are
// implementation-defined), so a seed pins the stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Independent stream for (master seed, stream index, role tag).
    static Rng derive(std::uint64_t master, std::uint64_t stream, std::uint64_t role) {
        std::seed_seq seq{lo(master), hi(master), lo(stream), hi(stream), lo(role), hi(role)};
        Rng r(0);
        r.eng_.seed(seq);
        return r;
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    int bit() { return static_cast<int>(next_u64() >> 63); }

    BitString bits(std::size_t n) {
        BitString out(n);
        for (std::size_t i = 0; i < n; ++i) out.set(i, bit() != 0);
        return out;
    }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 eng_;

    static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
    static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
};

// Role tags for stream derivation: one label per independent source of
// randomness, so trials and parties never share a stream.
namespace stream {
inline constexpr std::uint64_t kSenderInput = 1;
inline constexpr std::uint64_t kChannelNoise = 2;
inline constexpr std::uint64_t kReceiverDiscard = 3;
inline constexpr std::uint64_t kHashSeeds = 4;
inline constexpr std::uint64_t kKeys = 5;
inline constexpr std::uint64_t kChoice = 6;
inline constexpr std::uint64_t kOptimizer = 7;
inline constexpr std::uint64_t kOracle = 8;
}  // namespace stream

}  // namespace otforge

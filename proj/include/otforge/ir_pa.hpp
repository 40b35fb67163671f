#pragma once

#include <cstdint>
#include <optional>

#include "otforge/bitstring.hpp"
#include "otforge/hashing.hpp"

namespace otforge::ir_pa {

// Binary entropy in bits, with the 0*log(1/0) = 0 convention.
double binary_entropy(double q);

// Reconciliation parameters: check length kappa = ceil(m*(H(q)+delta)) and a
// weight cap for the decoder search.
struct IrParams {
    std::size_t block_len;
    double crossover;
    double margin;
    std::size_t check_len;
    std::size_t weight_cap;

    static IrParams derive(std::size_t m, double q, double delta);
};

// Privacy amplification parameters: key length l = floor(m*(1-delta)) - kappa,
// clamped at zero (a non-positive l yields an empty key).
struct PaParams {
    std::size_t block_len;
    double margin;
    std::size_t check_len;
    std::size_t key_len;

    static PaParams derive(std::size_t m, double delta, std::size_t kappa);
};

// Check value for reconciliation: the seed's hash of the block (r = kappa).
BitString encode_check(const BitString& x, const hashing::HashSeed& seed);

// Extracted key (r = l).
BitString extract_key(const BitString& x, const hashing::HashSeed& seed);

// Cap on candidates examined by one decode call. The search below costs
// sum_w C(m, w) candidates, so realistic (m, q) combinations exhaust any
// practical cap; exhaustion is reported as a normal decode failure.
inline constexpr std::uint64_t kDefaultDecodeBudget = 4'000'000;

struct DecodeResult {
    std::optional<BitString> word;
    std::uint64_t candidates = 0;
    bool budget_exhausted = false;
};

// Bounded-weight nearest-candidate search: error patterns are enumerated in
// increasing Hamming weight, ties broken by lexicographic order of support,
// and the first y^e whose hash matches the check value is returned. Failure
// (no match within w_max, or budget exhausted) is a normal return.
DecodeResult decode(const BitString& y, const BitString& check, const hashing::HashSeed& seed,
                    std::size_t w_max, std::uint64_t budget = kDefaultDecodeBudget);

}  // namespace otforge::ir_pa

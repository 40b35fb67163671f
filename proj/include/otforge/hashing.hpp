#pragma once

#include <cstddef>
#include <nlohmann/json_fwd.hpp>

#include "otforge/bitstring.hpp"
#include "otforge/rng.hpp"

namespace otforge::hashing {

// Seed of one member of the Toeplitz 2-universal family over GF(2).
// Output bit i is the parity of diagonal[m-1+i-j] & x[j] over j < m, i.e. the
// matrix is constant along diagonals and fully described by m+r-1 bits.
struct HashSeed {
    std::size_t in_len;   // m
    std::size_t out_len;  // r <= m
    BitString diagonal;   // m + r - 1 bits; empty when r == 0

    HashSeed(std::size_t m, std::size_t r, BitString diag);

    nlohmann::json to_json() const;
    static HashSeed from_json(const nlohmann::json& j);
};

HashSeed sample_seed(std::size_t m, std::size_t r, Rng& rng);

// Toeplitz matrix-vector product over GF(2); |x| must equal the seed's m.
BitString hash(const HashSeed& seed, const BitString& x);

// Column j of the seed's matrix: diagonal bits [m-1-j, m-1-j+r).
BitString column(const HashSeed& seed, std::size_t j);

}  // namespace otforge::hashing

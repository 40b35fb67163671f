#include "otforge/hashing.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace otforge::hashing {

HashSeed::HashSeed(std::size_t m, std::size_t r, BitString diag)
    : in_len(m), out_len(r), diagonal(std::move(diag)) {
    if (in_len == 0) throw std::invalid_argument("HashSeed: in_len must be positive");
    if (out_len > in_len) throw std::invalid_argument("HashSeed: out_len must not exceed in_len");
    const std::size_t want = out_len == 0 ? 0 : in_len + out_len - 1;
    if (diagonal.size() != want)
        throw std::invalid_argument("HashSeed: diagonal must hold m + r - 1 bits");
}

nlohmann::json HashSeed::to_json() const {
    return nlohmann::json{{"m", in_len}, {"r", out_len}, {"diagonal_hex", diagonal.to_hex()}};
}

HashSeed HashSeed::from_json(const nlohmann::json& j) {
    const auto m = j.at("m").get<std::size_t>();
    const auto r = j.at("r").get<std::size_t>();
    const std::size_t nbits = r == 0 ? 0 : m + r - 1;
    return HashSeed(m, r, BitString::from_hex(j.at("diagonal_hex").get<std::string>(), nbits));
}

HashSeed sample_seed(std::size_t m, std::size_t r, Rng& rng) {
    if (m == 0) throw std::invalid_argument("sample_seed: m must be positive");
    if (r > m) throw std::invalid_argument("sample_seed: r must not exceed m");
    return HashSeed(m, r, rng.bits(r == 0 ? 0 : m + r - 1));
}

BitString hash(const HashSeed& seed, const BitString& x) {
    if (x.size() != seed.in_len) throw std::invalid_argument("hash: input length must equal seed.in_len");
    BitString out(seed.out_len);
    if (seed.out_len == 0) return out;
    // Column j of the Toeplitz matrix is a contiguous diagonal window, so the
    // product accumulates one window XOR per set input bit.
    std::vector<std::uint64_t> acc(BitString::word_count(seed.out_len), 0);
    for (std::size_t j = 0; j < seed.in_len; ++j)
        if (x.get(j)) seed.diagonal.xor_window_into(seed.in_len - 1 - j, seed.out_len, acc);
    for (std::size_t i = 0; i < seed.out_len; ++i)
        out.set(i, (acc[i / 64] >> (i % 64)) & 1u);
    return out;
}

BitString column(const HashSeed& seed, std::size_t j) {
    if (j >= seed.in_len) throw std::out_of_range("column: index past in_len");
    if (seed.out_len == 0) return BitString(0);
    return seed.diagonal.window(seed.in_len - 1 - j, seed.out_len);
}

}  // namespace otforge::hashing

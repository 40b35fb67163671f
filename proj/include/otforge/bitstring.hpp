#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace otforge {

// Packed bit string over GF(2). Bit i lives in word i/64 at position i%64,
// i.e. little-endian within words and within bytes. The byte/hex layout is
// part of the serialization contract for seeds and transcripts.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t nbits) : words_(word_count(nbits)), nbits_(nbits) {}

    static BitString from_bits(std::initializer_list<int> bits);
    static BitString from_string(std::string_view s);  // e.g. "0101"
    static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);
    static BitString from_hex(std::string_view hex, std::size_t nbits);

    std::size_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }

    bool get(std::size_t i) const;
    void set(std::size_t i, bool v);
    void append(bool v);

    bool all_zero() const;
    std::size_t weight() const;

    BitString& operator^=(const BitString& other);  // sizes must match
    friend BitString operator^(BitString a, const BitString& b) {
        a ^= b;
        return a;
    }
    bool operator==(const BitString&) const = default;
    // Lexicographic by bit index 0,1,2,...
    bool operator<(const BitString& other) const;

    // `count` bits starting at `offset` as a new string.
    BitString window(std::size_t offset, std::size_t count) const;
    // XOR a window of this string into `acc` (acc holds at least count bits).
    void xor_window_into(std::size_t offset, std::size_t count, std::span<std::uint64_t> acc) const;

    std::string to_string() const;
    std::vector<std::uint8_t> to_bytes() const;
    std::string to_hex() const;

    std::span<const std::uint64_t> words() const { return words_; }

    static std::size_t word_count(std::size_t nbits) { return (nbits + 63) / 64; }

private:
    std::vector<std::uint64_t> words_;
    std::size_t nbits_ = 0;

    void trim();
};

}  // namespace otforge

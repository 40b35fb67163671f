#include "otforge/bitstring.hpp"

#include <bit>
#include <stdexcept>

namespace otforge {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("BitString: invalid hex digit");
}
}  // namespace

BitString BitString::from_bits(std::initializer_list<int> bits) {
    BitString out(bits.size());
    std::size_t i = 0;
    for (int b : bits) out.set(i++, b != 0);
    return out;
}

BitString BitString::from_string(std::string_view s) {
    BitString out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("BitString: expected '0' or '1'");
        out.set(i, s[i] == '1');
    }
    return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (bytes.size() * 8 < nbits) throw std::invalid_argument("BitString: byte buffer too short");
    BitString out(nbits);
    for (std::size_t i = 0; i < bytes.size() && i * 8 < nbits; ++i)
        out.words_[i / 8] |= static_cast<std::uint64_t>(bytes[i]) << (8 * (i % 8));
    out.trim();
    return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t nbits) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("BitString: hex length must be even");
    std::vector<std::uint8_t> bytes(hex.size() / 2);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<std::uint8_t>(hex_value(hex[2 * i]) * 16 + hex_value(hex[2 * i + 1]));
    return from_bytes(bytes, nbits);
}

bool BitString::get(std::size_t i) const {
    if (i >= nbits_) throw std::out_of_range("BitString::get");
    return (words_[i / 64] >> (i % 64)) & 1u;
}

void BitString::set(std::size_t i, bool v) {
    if (i >= nbits_) throw std::out_of_range("BitString::set");
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v)
        words_[i / 64] |= mask;
    else
        words_[i / 64] &= ~mask;
}

void BitString::append(bool v) {
    ++nbits_;
    if (word_count(nbits_) > words_.size()) words_.push_back(0);
    set(nbits_ - 1, v);
}

bool BitString::all_zero() const {
    for (auto w : words_)
        if (w != 0) return false;
    return true;
}

std::size_t BitString::weight() const {
    std::size_t w = 0;
    for (auto word : words_) w += static_cast<std::size_t>(std::popcount(word));
    return w;
}

BitString& BitString::operator^=(const BitString& other) {
    if (nbits_ != other.nbits_) throw std::invalid_argument("BitString: XOR length mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
}

bool BitString::operator<(const BitString& other) const {
    const std::size_t n = std::min(nbits_, other.nbits_);
    for (std::size_t i = 0; i < n; ++i) {
        const bool a = get(i), b = other.get(i);
        if (a != b) return b;
    }
    return nbits_ < other.nbits_;
}

BitString BitString::window(std::size_t offset, std::size_t count) const {
    BitString out(count);
    xor_window_into(offset, count, out.words_);
    return out;
}

void BitString::xor_window_into(std::size_t offset, std::size_t count, std::span<std::uint64_t> acc) const {
    if (offset + count > nbits_) throw std::out_of_range("BitString::xor_window_into");
    if (count == 0) return;
    const std::size_t word_off = offset / 64;
    const unsigned bit_off = static_cast<unsigned>(offset % 64);
    const std::size_t nw = word_count(count);
    for (std::size_t k = 0; k < nw; ++k) {
        std::uint64_t v = words_[word_off + k] >> bit_off;
        if (bit_off != 0 && word_off + k + 1 < words_.size())
            v |= words_[word_off + k + 1] << (64 - bit_off);
        if (k + 1 == nw && count % 64 != 0) v &= (~std::uint64_t{0}) >> (64 - count % 64);
        acc[k] ^= v;
    }
}

std::string BitString::to_string() const {
    std::string s(nbits_, '0');
    for (std::size_t i = 0; i < nbits_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
    std::vector<std::uint8_t> bytes((nbits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<std::uint8_t>((words_[i / 8] >> (8 * (i % 8))) & 0xFF);
    return bytes;
}

std::string BitString::to_hex() const {
    const auto bytes = to_bytes();
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(kHexDigits[b >> 4]);
        s.push_back(kHexDigits[b & 0xF]);
    }
    return s;
}

void BitString::trim() {
    if (nbits_ % 64 != 0 && !words_.empty())
        words_.back() &= (~std::uint64_t{0}) >> (64 - nbits_ % 64);
}

}  // namespace otforge

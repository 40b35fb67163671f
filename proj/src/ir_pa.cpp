#include "otforge/ir_pa.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "otforge/mathutil.hpp"

namespace otforge::ir_pa {

double binary_entropy(double q) {
    if (!(q >= 0.0) || !(q <= 1.0)) throw std::invalid_argument("binary_entropy: q must lie in [0,1]");
    return -xlog2x(q) - xlog2x(1.0 - q);
}

IrParams IrParams::derive(std::size_t m, double q, double delta) {
    if (m == 0) throw std::invalid_argument("IrParams: block_len must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("IrParams: margin must be positive");
    IrParams p;
    p.block_len = m;
    p.crossover = q;
    p.margin = delta;
    p.check_len = static_cast<std::size_t>(ceil_tol(static_cast<double>(m) * (binary_entropy(q) + delta)));
    p.weight_cap = static_cast<std::size_t>(ceil_tol(2.0 * q * static_cast<double>(m))) + 2;
    return p;
}

PaParams PaParams::derive(std::size_t m, double delta, std::size_t kappa) {
    if (m == 0) throw std::invalid_argument("PaParams: block_len must be positive");
    PaParams p;
    p.block_len = m;
    p.margin = delta;
    p.check_len = kappa;
    const auto l = floor_tol(static_cast<double>(m) * (1.0 - delta)) - static_cast<std::int64_t>(kappa);
    p.key_len = l > 0 ? static_cast<std::size_t>(l) : 0;
    return p;
}

BitString encode_check(const BitString& x, const hashing::HashSeed& seed) {
    return hashing::hash(seed, x);
}

BitString extract_key(const BitString& x, const hashing::HashSeed& seed) {
    return hashing::hash(seed, x);
}

namespace {

// Depth-first enumeration over supports of fixed weight in lexicographic
// order; acc carries the partial syndrome of the chosen columns.
struct SearchState {
    const std::vector<std::uint64_t>& cols;  // m rows of `words` words each
    const std::vector<std::uint64_t>& target;
    std::size_t m;
    std::size_t words;
    std::uint64_t budget;
    std::uint64_t candidates = 0;
    bool budget_exhausted = false;
    std::vector<std::size_t> support;

    bool matches(const std::uint64_t* col, const std::vector<std::uint64_t>& acc) const {
        for (std::size_t k = 0; k < words; ++k)
            if ((acc[k] ^ col[k]) != target[k]) return false;
        return true;
    }

    // Returns true when a match was found; `support` then holds the pattern.
    bool search(std::size_t start, std::size_t remaining, std::vector<std::uint64_t>& acc) {
        if (remaining == 1) {
            for (std::size_t j = start; j < m; ++j) {
                if (candidates >= budget) {
                    budget_exhausted = true;
                    return false;
                }
                ++candidates;
                if (matches(&cols[j * words], acc)) {
                    support.push_back(j);
                    return true;
                }
            }
            return false;
        }
        for (std::size_t j = start; j + remaining <= m; ++j) {
            const std::uint64_t* col = &cols[j * words];
            for (std::size_t k = 0; k < words; ++k) acc[k] ^= col[k];
            support.push_back(j);
            if (search(j + 1, remaining - 1, acc)) return true;
            support.pop_back();
            for (std::size_t k = 0; k < words; ++k) acc[k] ^= col[k];
            if (budget_exhausted) return false;
        }
        return false;
    }
};

}  // namespace

DecodeResult decode(const BitString& y, const BitString& check, const hashing::HashSeed& seed,
                    std::size_t w_max, std::uint64_t budget) {
    if (y.size() != seed.in_len) throw std::invalid_argument("decode: |y| must equal seed.in_len");
    if (check.size() != seed.out_len) throw std::invalid_argument("decode: |check| must equal seed.out_len");

    DecodeResult res;
    BitString syndrome = hashing::hash(seed, y) ^ check;
    res.candidates = 1;
    if (syndrome.all_zero()) {
        res.word = y;
        return res;
    }
    if (w_max == 0) return res;

    const std::size_t m = seed.in_len;
    const std::size_t words = BitString::word_count(seed.out_len);
    std::vector<std::uint64_t> cols(m * words, 0);
    for (std::size_t j = 0; j < m; ++j)
        seed.diagonal.xor_window_into(m - 1 - j, seed.out_len, {&cols[j * words], words});

    std::vector<std::uint64_t> target(words, 0);
    for (std::size_t i = 0; i < seed.out_len; ++i)
        if (syndrome.get(i)) target[i / 64] |= std::uint64_t{1} << (i % 64);

    SearchState st{cols, target, m, words, budget, res.candidates, false, {}};
    std::vector<std::uint64_t> acc(words, 0);
    for (std::size_t w = 1; w <= w_max && w <= m; ++w) {
        if (st.search(0, w, acc)) {
            BitString word = y;
            for (std::size_t j : st.support) word.set(j, !word.get(j));
            res.word = std::move(word);
            res.candidates = st.candidates;
            return res;
        }
        if (st.budget_exhausted) break;
    }
    res.candidates = st.candidates;
    res.budget_exhausted = st.budget_exhausted;
    return res;
}

}  // namespace otforge::ir_pa

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "otforge/rng.hpp"

namespace otforge::channel {

using Symbol = std::uint8_t;

// Conventional erasure label; for the BSEC alphabets below it is symbol 2.
inline constexpr std::string_view kErasureLabel = "e";
inline constexpr Symbol kBsecErasure = 2;

// Erasure probability p in [0, 1/2] and crossover probability q. p = 0 is a
// pure BSC; p > 1/2 needs a different discard rule and is rejected.
struct BsecParams {
    double p;
    double q;
    BsecParams(double erasure_prob, double crossover_prob);
};

// Finite discrete memoryless channel: a row-stochastic matrix with labeled
// alphabets. Immutable after construction and safe to share across threads.
class ChannelSpec {
public:
    ChannelSpec(std::vector<std::string> inputs, std::vector<std::string> outputs,
                std::vector<std::vector<double>> matrix);

    std::size_t num_inputs() const { return inputs_.size(); }
    std::size_t num_outputs() const { return outputs_.size(); }
    const std::vector<std::string>& input_labels() const { return inputs_; }
    const std::vector<std::string>& output_labels() const { return outputs_; }
    const std::string& input_label(Symbol x) const { return inputs_.at(x); }
    const std::string& output_label(Symbol y) const { return outputs_.at(y); }
    std::optional<Symbol> input_index(std::string_view label) const;
    std::optional<Symbol> output_index(std::string_view label) const;

    double prob(Symbol x, Symbol y) const { return matrix_.at(x).at(y); }
    const std::vector<std::vector<double>>& matrix() const { return matrix_; }

    Symbol sample_one(Symbol x, Rng& rng) const;

    nlohmann::json to_json() const;
    static ChannelSpec from_json(const nlohmann::json& j);

private:
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::vector<std::vector<double>> matrix_;
    std::vector<std::vector<double>> cumulative_;
};

struct ChannelSample {
    std::vector<Symbol> inputs;
    std::vector<Symbol> outputs;
};

// BSEC with inputs {0,1} and outputs {0,1,e}:
//   W(0|0) = W(1|1) = (1-p)(1-q), W(1|0) = W(0|1) = (1-p)q, W(e|x) = p.
ChannelSpec make_bsec(const BsecParams& params);

// The two-use product channel with X = {0,1}^2 and Y = {0,1,e}^2 whose rows
// put mass 1/4 on (x1,e), (e,x2), (x1,x2) and 1/8 on the two single-flip pairs.
ChannelSpec make_example1();

// Memoryless use of the channel once per input position.
ChannelSample sample(const ChannelSpec& spec, std::span<const Symbol> inputs, Rng& rng);

// One step of BSC -> BSEC erasure emulation for an aligned pair: the sender
// pair must hold equal bits (repetition, or parity-aligned), receiver bits map
// to their common value or to an erasure when they disagree.
struct EmulatedUse {
    int x;     // relabeled sender bit
    Symbol y;  // 0, 1, or kBsecErasure
};
EmulatedUse emulate_bsec_pair(int x1, int x2, int y1, int y2);

// Parameters of the emulated BSEC after one pairing round of a BSC(q):
// p' = 2q(1-q), q' = q^2 / ((1-q)^2 + q^2).
struct EmulatedParams {
    double p_next;
    double q_next;
};
EmulatedParams emulated_params(double q);

}  // namespace otforge::channel

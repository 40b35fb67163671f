#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "otforge/bitstring.hpp"
#include "otforge/channel.hpp"
#include "otforge/hashing.hpp"
#include "otforge/ir_pa.hpp"
#include "otforge/rng.hpp"
#include "otforge/stats.hpp"

namespace otforge::protocol {

// Protocol inputs as seen by the harness. The per-round sizes are derived by
// Schedule::derive; n must be even for the recursive protocol.
struct ProtocolParams {
    std::size_t n = 0;
    int rounds = 1;
    double delta = 0.05;
    double p1 = 0.25;
    double q1 = 0.05;
};

// Per-round sizes n_t, m_t, kappa_t, l_t and the emulated channel parameters
// (p_t, q_t), all fixed once by the protocol inputs:
//   n_t = ceil(n_{t-1} (1 - 2 p_t - delta) / 2)
//   m_t = ceil(n_{t-1} (p_t - delta))   (clamped at 0)
//   kappa_t = ceil(m_t (H(q_t) + delta))
//   l_t = floor(m_t (1 - delta)) - kappa_t (clamped at 0)
struct Schedule {
    std::size_t n0 = 0;
    int rounds = 1;
    double delta = 0.0;
    std::vector<double> p;  // p[t], t = 0..rounds-1
    std::vector<double> q;
    std::vector<std::size_t> n_t;
    std::vector<std::size_t> m;
    std::vector<std::size_t> kappa;
    std::vector<std::size_t> ell;
    std::vector<std::size_t> w_max;

    static Schedule derive(const ProtocolParams& params);
    std::size_t total_key_bits() const;
    nlohmann::json to_json() const;
};

enum class Dir : std::uint8_t { SenderToReceiver, ReceiverToSender };

struct Message {
    int round = 0;
    Dir dir = Dir::SenderToReceiver;
    std::string tag;
    std::vector<std::uint8_t> payload;
};

struct ChannelUse {
    std::uint32_t index = 0;
    channel::Symbol input = 0;
    channel::Symbol output = 0;
};

// Ordered record of noisy-channel uses and noiseless messages. The sender's
// view holds the inputs and the messages; the receiver's view holds the
// outputs, the messages, and the choice bit.
struct Transcript {
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    std::vector<ChannelUse> uses;
    std::vector<Message> messages;

    nlohmann::json to_json() const;
    nlohmann::json sender_view() const;
    nlohmann::json receiver_view(int choice) const;
    std::vector<std::uint8_t> message_bytes() const;  // framed, for exact distributions
};

struct OtOutcome {
    bool aborted = false;
    std::string abort_reason;
    int abort_round = -1;  // 1-based round, -1 when not aborted

    int choice = 0;
    std::vector<std::pair<BitString, BitString>> keys_sender;  // (K0, K1) per round
    std::vector<BitString> keys_receiver;                      // K-hat per round
    std::vector<bool> decode_failed;                           // per round
    double rate = 0.0;  // total key bits / channel uses, 0 when aborted

    bool any_decode_failure() const;
    bool keys_match() const;  // every round: K-hat equals K_{choice}
};

// Slot-labeled index sets sent in the first message of a round: slot B holds
// the kept non-erased indices (V=0), slot 1-B the erased ones (V=1), and i2
// the discarded indices reserved for the next round.
struct IndexSets {
    std::vector<std::uint32_t> i0;
    std::vector<std::uint32_t> i1;
    std::vector<std::uint32_t> i2;
};

// Deliberately broken protocol variants used by the security lab.
//  - LeakOrder: the erased-slot index set is drawn from the tail of its pool
//    instead of the head, so the slot order statistics reveal B.
//  - LeakSbar: the sender appends the first bit of each one-time pad to the
//    second message, revealing one bit of both keys.
//  - BiasedDiscard: the keep probability is shifted away from p/(1-p), so
//    P(V=0) != P(V=1) and the index sets are no longer exchangeable.
enum class Mutation : std::uint8_t { None, LeakOrder, LeakSbar, BiasedDiscard };

// V in {0,1,2}: 1 for erasures, else 0 with probability p/(1-p) and 2
// otherwise. p = 0 keeps every symbol (V=2) without drawing.
int discard_sample(channel::Symbol y, double p, Rng& rng);

// First m_t indices with V=0 into slot B, first m_t with V=1 into slot 1-B,
// first 2*n_t with V=2 into i2; nullopt when any pool is short.
std::optional<IndexSets> build_index_sets(std::span<const int> v, int choice, std::size_t m_t,
                                          std::size_t n_t, Mutation mutation = Mutation::None);

struct RunInputs {
    int choice = 0;
    std::vector<std::pair<BitString, BitString>> keys;  // (K0, K1) per round
};

struct Streams {
    Rng sender;
    Rng receiver;
    Rng channel;
    Rng hashing;

    static Streams derive(std::uint64_t master, std::uint64_t trial);
};

enum class DecodeMode : std::uint8_t {
    Real,   // bounded-weight search from the check value only
    Genie,  // diagnostic: succeed with the true block iff its error weight fits w_max
};

struct RunOptions {
    Mutation mutation = Mutation::None;
    DecodeMode decode_mode = DecodeMode::Real;
    std::uint64_t decode_budget = ir_pa::kDefaultDecodeBudget;
    bool collect_transcript = true;
};

struct RunResult {
    OtOutcome outcome;
    Transcript transcript;
};

// Standard single-round protocol over the BSEC (schedule must have rounds==1).
RunResult run_protocol1(const Schedule& schedule, const RunInputs& inputs, Streams& streams,
                        const RunOptions& options = {});

// Recursive T-round protocol; round t+1 runs on the BSEC emulated from the
// discarded indices of round t via parity reveal and relabeling.
RunResult run_protocol2(const Schedule& schedule, const RunInputs& inputs, Streams& streams,
                        const RunOptions& options = {});

// Two-phase protocol for the example product channel: phase 1 transfers the
// non-erased coordinate of single-erasure outputs, phase 2 pairs up the
// erasure-free outputs into an emulated half-erasure channel. Phase key
// lengths are 2*floor(n(1/4-delta)) and floor(n(1/4-delta)).
RunResult run_protocol3(std::size_t n, double delta, const RunInputs& inputs, Streams& streams,
                        const RunOptions& options = {});

struct Protocol3Dims {
    std::size_t pool_erase = 0;  // indices kept per single-erasure pool
    std::size_t pool_pairs = 0;  // indices kept for phase 2
    std::size_t phase2_keep = 0;
    std::size_t phase1_key_bits = 0;
    std::size_t phase2_key_bits = 0;
};
Protocol3Dims protocol3_dims(std::size_t n, double delta);

// Uniform keys of the scheduled lengths plus a uniform choice bit.
RunInputs make_inputs(const Schedule& schedule, Rng& key_rng, Rng& choice_rng);
RunInputs make_inputs_p3(std::size_t n, double delta, Rng& key_rng, Rng& choice_rng);

// Single round of the standard protocol from explicit randomness; used by the
// exact enumeration in the security lab. No receiver decoding is performed.
struct ExplicitRound {
    std::size_t m = 1;
    std::size_t kappa = 1;
    std::size_t ell = 1;
    int choice = 0;
    BitString k0;
    BitString k1;
    std::vector<int> x;              // sender bits
    std::vector<channel::Symbol> y;  // 0, 1, or erasure
    std::vector<int> v;              // discard values, aligned with y
    hashing::HashSeed key_seed{1, 0, BitString(0)};    // F: m -> ell
    hashing::HashSeed check_seed{1, 0, BitString(0)};  // G: m -> kappa
    Mutation mutation = Mutation::None;
};
Transcript protocol1_messages(const ExplicitRound& round);

struct TrialStats {
    std::uint64_t trials = 0;
    std::uint64_t aborts = 0;
    std::uint64_t decode_failures = 0;  // trials with at least one failed decode
    std::uint64_t key_mismatches = 0;   // trials with K-hat != K_B in some round
    std::uint64_t failures = 0;         // abort or decode failure or mismatch
    double estimate = 0.0;              // failures / trials
    stats::Interval wilson;
    double mean_rate_completed = 0.0;  // mean over non-aborted trials
    double mean_rate_all = 0.0;        // aborted trials count as rate 0
    std::vector<double> mean_phase_rates;  // per-round key bits / n, non-aborted
};

enum class Variant : std::uint8_t { P1, P2, P3 };

struct EstimateConfig {
    Variant variant = Variant::P2;
    ProtocolParams params;
    std::uint64_t trials = 100;
    std::uint64_t master_seed = 1;
    int threads = 0;
    RunOptions options;
};

// Fraction of trials with an abort, a decode failure, or a key mismatch,
// with a Wilson 95% interval. Reproducible for a fixed master seed and any
// thread count (per-trial derived streams, ordered reduction).
TrialStats estimate_correctness(const EstimateConfig& config);

}  // namespace otforge::protocol

#include "otforge/protocol.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "otforge/mathutil.hpp"
#include "otforge/parallel.hpp"

namespace otforge::protocol {

namespace {

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void append_list(std::vector<std::uint8_t>& out, std::span<const std::uint32_t> xs) {
    append_u32(out, static_cast<std::uint32_t>(xs.size()));
    for (auto x : xs) append_u32(out, x);
}

void append_bits(std::vector<std::uint8_t>& out, const BitString& bits) {
    append_u64(out, bits.size());
    const auto bytes = bits.to_bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
}

void append_seed(std::vector<std::uint8_t>& out, const hashing::HashSeed& seed) {
    append_u64(out, seed.in_len);
    append_u64(out, seed.out_len);
    append_bits(out, seed.diagonal);
}

BitString gather_bits(std::span<const int> values, std::span<const std::uint32_t> idx) {
    BitString out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out.set(k, values[idx[k]] != 0);
    return out;
}

BitString gather_symbols(std::span<const channel::Symbol> values, std::span<const std::uint32_t> idx) {
    BitString out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const channel::Symbol s = values[idx[k]];
        if (s == channel::kBsecErasure)
            throw std::logic_error("gather_symbols: erased symbol in a non-erased pool");
        out.set(k, s != 0);
    }
    return out;
}

std::string dir_name(Dir d) { return d == Dir::SenderToReceiver ? "s2r" : "r2s"; }

// Shared construction of one standard-protocol round's messages given the
// already-built index sets and explicit hash seeds. Returns the pads so the
// caller can run the receiver side.
struct RoundMessages {
    BitString pad0, pad1;    // K_b ^ S_b
    BitString check0, check1;
};

RoundMessages build_round_messages(int round, const IndexSets& sets, std::span<const int> x,
                                   const BitString& k0, const BitString& k1,
                                   const hashing::HashSeed& key_seed,
                                   const hashing::HashSeed& check_seed, Mutation mutation,
                                   Transcript& transcript) {
    RoundMessages msgs;
    const BitString x0 = gather_bits(x, sets.i0);
    const BitString x1 = gather_bits(x, sets.i1);
    const BitString s0 = hashing::hash(key_seed, x0);
    const BitString s1 = hashing::hash(key_seed, x1);
    msgs.pad0 = k0 ^ s0;
    msgs.pad1 = k1 ^ s1;
    msgs.check0 = hashing::hash(check_seed, x0);
    msgs.check1 = hashing::hash(check_seed, x1);

    Message pi2;
    pi2.round = round;
    pi2.dir = Dir::SenderToReceiver;
    pi2.tag = "otp-and-checks";
    append_bits(pi2.payload, msgs.pad0);
    append_bits(pi2.payload, msgs.pad1);
    append_bits(pi2.payload, msgs.check0);
    append_bits(pi2.payload, msgs.check1);
    append_seed(pi2.payload, key_seed);
    append_seed(pi2.payload, check_seed);
    if (mutation == Mutation::LeakSbar) {
        pi2.payload.push_back(static_cast<std::uint8_t>(s0.size() > 0 && s0.get(0)));
        pi2.payload.push_back(static_cast<std::uint8_t>(s1.size() > 0 && s1.get(0)));
    }
    transcript.messages.push_back(std::move(pi2));
    return msgs;
}

void push_index_message(int round, const IndexSets& sets, Transcript& transcript) {
    Message pi1;
    pi1.round = round;
    pi1.dir = Dir::ReceiverToSender;
    pi1.tag = "round-indices";
    append_list(pi1.payload, sets.i0);
    append_list(pi1.payload, sets.i1);
    append_list(pi1.payload, sets.i2);
    transcript.messages.push_back(std::move(pi1));
}

void push_abort_message(int round, const std::string& reason, Transcript& transcript) {
    Message m;
    m.round = round;
    m.dir = Dir::ReceiverToSender;
    m.tag = "abort";
    m.payload.assign(reason.begin(), reason.end());
    transcript.messages.push_back(std::move(m));
}

}  // namespace

Schedule Schedule::derive(const ProtocolParams& params) {
    if (params.n == 0) throw std::invalid_argument("Schedule: n must be positive");
    if (params.rounds < 1) throw std::invalid_argument("Schedule: rounds must be >= 1");
    if (params.rounds > 1 && params.n % 2 != 0)
        throw std::invalid_argument("Schedule: n must be even for the recursive protocol");
    if (!(params.delta > 0.0) || !(params.delta < 0.5))
        throw std::invalid_argument("Schedule: delta must lie in (0, 0.5)");
    channel::BsecParams bsec(params.p1, params.q1);  // validates p1, q1

    Schedule s;
    s.n0 = params.n;
    s.rounds = params.rounds;
    s.delta = params.delta;
    double p = bsec.p, q = bsec.q;
    double n_prev = static_cast<double>(params.n);
    for (int t = 0; t < params.rounds; ++t) {
        s.p.push_back(p);
        s.q.push_back(q);
        const std::int64_t m_raw = ceil_tol(n_prev * (p - params.delta));
        const std::size_t m = m_raw > 0 ? static_cast<std::size_t>(m_raw) : 0;
        const std::int64_t n_raw = ceil_tol(n_prev * (1.0 - 2.0 * p - params.delta) / 2.0);
        const std::size_t n_t = n_raw > 0 ? static_cast<std::size_t>(n_raw) : 0;
        s.m.push_back(m);
        s.n_t.push_back(n_t);
        if (m > 0) {
            const auto ir = ir_pa::IrParams::derive(m, q, params.delta);
            const auto pa = ir_pa::PaParams::derive(m, params.delta, ir.check_len);
            s.kappa.push_back(ir.check_len);
            s.ell.push_back(pa.key_len);
            s.w_max.push_back(ir.weight_cap);
        } else {
            s.kappa.push_back(0);
            s.ell.push_back(0);
            s.w_max.push_back(0);
        }
        if (t + 1 < params.rounds) {
            if (!(q > 0.0) || !(q < 1.0))
                throw std::invalid_argument("Schedule: recursion needs 0 < q < 1");
            const auto next = channel::emulated_params(q);
            p = next.p_next;
            q = next.q_next;
            n_prev = static_cast<double>(n_t);
        }
    }
    return s;
}

std::size_t Schedule::total_key_bits() const {
    std::size_t total = 0;
    for (auto l : ell) total += l;
    return total;
}

nlohmann::json Schedule::to_json() const {
    return nlohmann::json{{"n0", n0},     {"rounds", rounds}, {"delta", delta}, {"p", p},
                          {"q", q},       {"n_t", n_t},       {"m", m},         {"kappa", kappa},
                          {"ell", ell},   {"w_max", w_max}};
}

nlohmann::json Transcript::to_json() const {
    nlohmann::json uses_json = nlohmann::json::array();
    for (const auto& u : uses)
        uses_json.push_back({{"i", u.index},
                             {"in", input_labels.at(u.input)},
                             {"out", output_labels.at(u.output)}});
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        BitString payload = BitString::from_bytes(m.payload, m.payload.size() * 8);
        msgs.push_back({{"round", m.round}, {"dir", dir_name(m.dir)}, {"tag", m.tag},
                        {"hex", payload.to_hex()}});
    }
    return nlohmann::json{{"uses", uses_json}, {"messages", msgs}};
}

nlohmann::json Transcript::sender_view() const {
    nlohmann::json j = to_json();
    for (auto& u : j["uses"]) u.erase("out");
    return j;
}

nlohmann::json Transcript::receiver_view(int choice) const {
    nlohmann::json j = to_json();
    for (auto& u : j["uses"]) u.erase("in");
    j["choice"] = choice;
    return j;
}

std::vector<std::uint8_t> Transcript::message_bytes() const {
    std::vector<std::uint8_t> out;
    for (const auto& m : messages) {
        append_u32(out, static_cast<std::uint32_t>(m.round));
        out.push_back(static_cast<std::uint8_t>(m.dir));
        append_u32(out, static_cast<std::uint32_t>(m.tag.size()));
        out.insert(out.end(), m.tag.begin(), m.tag.end());
        append_u32(out, static_cast<std::uint32_t>(m.payload.size()));
        out.insert(out.end(), m.payload.begin(), m.payload.end());
    }
    return out;
}

bool OtOutcome::any_decode_failure() const {
    for (bool f : decode_failed)
        if (f) return true;
    return false;
}

bool OtOutcome::keys_match() const {
    if (aborted) return false;
    for (std::size_t t = 0; t < keys_receiver.size(); ++t) {
        const BitString& expect = choice == 0 ? keys_sender[t].first : keys_sender[t].second;
        if (!(keys_receiver[t] == expect)) return false;
    }
    return true;
}

int discard_sample(channel::Symbol y, double p, Rng& rng) {
    if (!(p >= 0.0) || !(p <= 0.5)) throw std::invalid_argument("discard_sample: p must lie in [0, 0.5]");
    if (y == channel::kBsecErasure) return 1;
    if (p <= 0.0) return 2;
    return rng.bernoulli(p / (1.0 - p)) ? 0 : 2;
}

std::optional<IndexSets> build_index_sets(std::span<const int> v, int choice, std::size_t m_t,
                                          std::size_t n_t, Mutation mutation) {
    std::vector<std::uint32_t> pool0, pool1, pool2;
    for (std::size_t i = 0; i < v.size(); ++i) {
        switch (v[i]) {
            case 0: pool0.push_back(static_cast<std::uint32_t>(i)); break;
            case 1: pool1.push_back(static_cast<std::uint32_t>(i)); break;
            case 2: pool2.push_back(static_cast<std::uint32_t>(i)); break;
            default: throw std::invalid_argument("build_index_sets: V values must lie in {0,1,2}");
        }
    }
    if (pool0.size() < m_t || pool1.size() < m_t || pool2.size() < 2 * n_t) return std::nullopt;

    IndexSets sets;
    auto& slot_b = choice == 0 ? sets.i0 : sets.i1;
    auto& slot_nb = choice == 0 ? sets.i1 : sets.i0;
    slot_b.assign(pool0.begin(), pool0.begin() + static_cast<std::ptrdiff_t>(m_t));
    if (mutation == Mutation::LeakOrder)
        slot_nb.assign(pool1.end() - static_cast<std::ptrdiff_t>(m_t), pool1.end());
    else
        slot_nb.assign(pool1.begin(), pool1.begin() + static_cast<std::ptrdiff_t>(m_t));
    sets.i2.assign(pool2.begin(), pool2.begin() + static_cast<std::ptrdiff_t>(2 * n_t));
    return sets;
}

Streams Streams::derive(std::uint64_t master, std::uint64_t trial) {
    return Streams{Rng::derive(master, trial, stream::kSenderInput),
                   Rng::derive(master, trial, stream::kReceiverDiscard),
                   Rng::derive(master, trial, stream::kChannelNoise),
                   Rng::derive(master, trial, stream::kHashSeeds)};
}

namespace {

int biased_discard_sample(channel::Symbol y, double p, Rng& rng) {
    if (y == channel::kBsecErasure) return 1;
    if (p <= 0.0) return 2;
    return rng.bernoulli(p / (1.0 - p) + 0.01) ? 0 : 2;
}

RunResult run_recursive_impl(const Schedule& sch, const RunInputs& inputs, Streams& st,
                             const RunOptions& opt) {
    if (inputs.keys.size() != static_cast<std::size_t>(sch.rounds))
        throw std::invalid_argument("run: one (K0, K1) pair per round is required");
    for (int t = 0; t < sch.rounds; ++t)
        if (inputs.keys[t].first.size() != sch.ell[t] || inputs.keys[t].second.size() != sch.ell[t])
            throw std::invalid_argument("run: key length must equal the scheduled l_t");
    if (inputs.choice != 0 && inputs.choice != 1)
        throw std::invalid_argument("run: choice must be a bit");

    const auto bsec = channel::make_bsec(channel::BsecParams(sch.p[0], sch.q[0]));

    RunResult res;
    res.outcome.choice = inputs.choice;
    res.transcript.input_labels = bsec.input_labels();
    res.transcript.output_labels = bsec.output_labels();

    // Round 1 transmission over the physical channel.
    std::vector<int> x(sch.n0);
    std::vector<channel::Symbol> y(sch.n0);
    for (std::size_t i = 0; i < sch.n0; ++i) {
        x[i] = st.sender.bit();
        y[i] = bsec.sample_one(static_cast<channel::Symbol>(x[i]), st.channel);
        if (opt.collect_transcript)
            res.transcript.uses.push_back({static_cast<std::uint32_t>(i),
                                           static_cast<channel::Symbol>(x[i]), y[i]});
    }

    for (int t = 0; t < sch.rounds; ++t) {
        const int round = t + 1;
        const bool last = (t + 1 == sch.rounds);

        std::vector<int> v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            v[i] = opt.mutation == Mutation::BiasedDiscard
                       ? biased_discard_sample(y[i], sch.p[t], st.receiver)
                       : discard_sample(y[i], sch.p[t], st.receiver);

        const std::size_t need_pairs = last ? 0 : sch.n_t[t];
        auto sets = build_index_sets(v, inputs.choice, sch.m[t], need_pairs, opt.mutation);
        if (!sets) {
            res.outcome.aborted = true;
            res.outcome.abort_round = round;
            res.outcome.abort_reason = "insufficient indices, round " + std::to_string(round);
            push_abort_message(round, res.outcome.abort_reason, res.transcript);
            return res;
        }
        push_index_message(round, *sets, res.transcript);

        // Rounds with l_t = 0 transfer nothing (e.g. q_t = 0.5, where kappa_t
        // would exceed the block); they contribute only their pairing step.
        if (sch.m[t] > 0 && sch.ell[t] > 0) {
            const auto key_seed = hashing::sample_seed(sch.m[t], sch.ell[t], st.hashing);
            const auto check_seed = hashing::sample_seed(sch.m[t], sch.kappa[t], st.hashing);
            const auto msgs = build_round_messages(round, *sets, x, inputs.keys[t].first,
                                                   inputs.keys[t].second, key_seed, check_seed,
                                                   opt.mutation, res.transcript);

            const auto& slot_b = inputs.choice == 0 ? sets->i0 : sets->i1;
            const BitString y_b = gather_symbols(y, slot_b);
            const BitString& pad_b = inputs.choice == 0 ? msgs.pad0 : msgs.pad1;
            const BitString& check_b = inputs.choice == 0 ? msgs.check0 : msgs.check1;

            bool failed = false;
            BitString key_hat(sch.ell[t]);
            if (opt.decode_mode == DecodeMode::Genie) {
                const BitString x_b = gather_bits(x, slot_b);
                if ((x_b ^ y_b).weight() <= sch.w_max[t])
                    key_hat = pad_b ^ hashing::hash(key_seed, x_b);
                else
                    failed = true;
            } else {
                const auto dec =
                    ir_pa::decode(y_b, check_b, check_seed, sch.w_max[t], opt.decode_budget);
                if (dec.word)
                    key_hat = pad_b ^ hashing::hash(key_seed, *dec.word);
                else
                    failed = true;
            }
            res.outcome.keys_sender.push_back(inputs.keys[t]);
            res.outcome.keys_receiver.push_back(std::move(key_hat));
            res.outcome.decode_failed.push_back(failed);
        } else {
            res.outcome.keys_sender.push_back({BitString(0), BitString(0)});
            res.outcome.keys_receiver.push_back(BitString(0));
            res.outcome.decode_failed.push_back(false);
        }

        if (!last) {
            // Pair up the reserved indices, reveal parities, align and relabel.
            const std::size_t pairs = sch.n_t[t];
            BitString parities(pairs);
            std::vector<int> x_next(pairs);
            std::vector<channel::Symbol> y_next(pairs);
            for (std::size_t k = 0; k < pairs; ++k) {
                const std::uint32_t a = sets->i2[2 * k];
                const std::uint32_t b = sets->i2[2 * k + 1];
                const int parity = x[a] ^ x[b];
                parities.set(k, parity != 0);
                const int xa = x[a] ^ parity;
                int ya = static_cast<int>(y[a]);
                if (parity != 0) ya = 1 - ya;  // i2 indices are never erased
                const auto use = channel::emulate_bsec_pair(xa, x[b], ya, static_cast<int>(y[b]));
                x_next[k] = use.x;
                y_next[k] = use.y;
            }
            Message par;
            par.round = round;
            par.dir = Dir::SenderToReceiver;
            par.tag = "parities";
            append_bits(par.payload, parities);
            res.transcript.messages.push_back(std::move(par));
            x = std::move(x_next);
            y = std::move(y_next);
        }
    }

    res.outcome.rate = static_cast<double>(sch.total_key_bits()) / static_cast<double>(sch.n0);
    return res;
}

}  // namespace

RunResult run_protocol1(const Schedule& schedule, const RunInputs& inputs, Streams& streams,
                        const RunOptions& options) {
    if (schedule.rounds != 1)
        throw std::invalid_argument("run_protocol1: schedule must have rounds == 1");
    return run_recursive_impl(schedule, inputs, streams, options);
}

RunResult run_protocol2(const Schedule& schedule, const RunInputs& inputs, Streams& streams,
                        const RunOptions& options) {
    return run_recursive_impl(schedule, inputs, streams, options);
}

Transcript protocol1_messages(const ExplicitRound& round) {
    Transcript tr;
    tr.input_labels = {"0", "1"};
    tr.output_labels = {"0", "1", "e"};
    auto sets = build_index_sets(round.v, round.choice, round.m, 0, round.mutation);
    if (!sets) {
        push_abort_message(1, "insufficient indices, round 1", tr);
        return tr;
    }
    push_index_message(1, *sets, tr);
    build_round_messages(1, *sets, round.x, round.k0, round.k1, round.key_seed, round.check_seed,
                         round.mutation, tr);
    return tr;
}

Protocol3Dims protocol3_dims(std::size_t n, double delta) {
    if (n == 0) throw std::invalid_argument("protocol3: n must be positive");
    if (!(delta > 0.0) || !(delta < 0.25))
        throw std::invalid_argument("protocol3: delta must lie in (0, 0.25)");
    Protocol3Dims d;
    const auto quarter = floor_tol(static_cast<double>(n) * (0.25 - delta));
    const auto half = floor_tol(static_cast<double>(n) * (0.5 - delta));
    d.pool_erase = quarter > 0 ? static_cast<std::size_t>(quarter) : 0;
    d.pool_pairs = half > 0 ? static_cast<std::size_t>(half) : 0;
    d.phase2_keep = d.pool_erase;
    d.phase1_key_bits = 2 * d.pool_erase;
    d.phase2_key_bits = d.phase2_keep;
    return d;
}

RunResult run_protocol3(std::size_t n, double delta, const RunInputs& inputs, Streams& st,
                        const RunOptions& opt) {
    const auto dims = protocol3_dims(n, delta);
    if (inputs.keys.size() != 2)
        throw std::invalid_argument("run_protocol3: two (K0, K1) pairs are required");
    if (inputs.keys[0].first.size() != dims.phase1_key_bits ||
        inputs.keys[0].second.size() != dims.phase1_key_bits)
        throw std::invalid_argument("run_protocol3: phase-1 key length mismatch");
    if (inputs.keys[1].first.size() != dims.phase2_key_bits ||
        inputs.keys[1].second.size() != dims.phase2_key_bits)
        throw std::invalid_argument("run_protocol3: phase-2 key length mismatch");

    const auto spec = channel::make_example1();
    RunResult res;
    res.outcome.choice = inputs.choice;
    res.transcript.input_labels = spec.input_labels();
    res.transcript.output_labels = spec.output_labels();

    // Coordinates of each product symbol: 0, 1, or 2 for the erasure mark.
    auto coord = [&spec](channel::Symbol s, int which) -> int {
        const char c = spec.output_label(s)[static_cast<std::size_t>(which)];
        return c == 'e' ? 2 : c - '0';
    };

    std::vector<int> x1(n), x2(n);
    std::vector<channel::Symbol> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = st.sender.bit();
        x2[i] = st.sender.bit();
        const auto in_sym = static_cast<channel::Symbol>(2 * x1[i] + x2[i]);
        ys[i] = spec.sample_one(in_sym, st.channel);
        if (opt.collect_transcript)
            res.transcript.uses.push_back({static_cast<std::uint32_t>(i), in_sym, ys[i]});
    }

    std::vector<std::uint32_t> pool_e1, pool_e2, pool_keep;
    for (std::size_t i = 0; i < n; ++i) {
        const int c1 = coord(ys[i], 0), c2 = coord(ys[i], 1);
        if (c1 != 2 && c2 == 2)
            pool_e1.push_back(static_cast<std::uint32_t>(i));
        else if (c1 == 2 && c2 != 2)
            pool_e2.push_back(static_cast<std::uint32_t>(i));
        else if (c1 != 2 && c2 != 2)
            pool_keep.push_back(static_cast<std::uint32_t>(i));
    }

    auto abort = [&](int round, const std::string& reason) {
        res.outcome.aborted = true;
        res.outcome.abort_round = round;
        res.outcome.abort_reason = reason;
        push_abort_message(round, reason, res.transcript);
        return res;
    };

    if (pool_e1.size() < dims.pool_erase || pool_e2.size() < dims.pool_erase)
        return abort(1, "insufficient indices, round 1");
    if (pool_keep.size() < dims.pool_pairs) return abort(1, "insufficient indices, round 1");

    std::vector<std::uint32_t> ie1(pool_e1.begin(),
                                   pool_e1.begin() + static_cast<std::ptrdiff_t>(dims.pool_erase));
    std::vector<std::uint32_t> ie2(pool_e2.begin(),
                                   pool_e2.begin() + static_cast<std::ptrdiff_t>(dims.pool_erase));
    std::vector<std::uint32_t> i2(pool_keep.begin(),
                                  pool_keep.begin() + static_cast<std::ptrdiff_t>(dims.pool_pairs));

    // The receiver claims the first list holds (*, e) outputs; with B = 1 the
    // two lists are swapped, which the sender cannot detect.
    const auto& sent1 = inputs.choice == 0 ? ie1 : ie2;
    const auto& sent2 = inputs.choice == 0 ? ie2 : ie1;

    Message pools;
    pools.round = 1;
    pools.dir = Dir::ReceiverToSender;
    pools.tag = "erasure-pools";
    append_list(pools.payload, sent1);
    append_list(pools.payload, sent2);
    append_list(pools.payload, i2);
    res.transcript.messages.push_back(std::move(pools));

    // S_0 pads the coordinates the claimed lists expose; S_1 pads the others.
    BitString s0(dims.phase1_key_bits), s1(dims.phase1_key_bits);
    for (std::size_t k = 0; k < sent1.size(); ++k) {
        s0.set(k, x1[sent1[k]] != 0);
        s1.set(k, x2[sent1[k]] != 0);
    }
    for (std::size_t k = 0; k < sent2.size(); ++k) {
        s0.set(sent1.size() + k, x2[sent2[k]] != 0);
        s1.set(sent1.size() + k, x1[sent2[k]] != 0);
    }
    const BitString pad0 = inputs.keys[0].first ^ s0;
    const BitString pad1 = inputs.keys[0].second ^ s1;
    Message otp1;
    otp1.round = 1;
    otp1.dir = Dir::SenderToReceiver;
    otp1.tag = "otp-phase1";
    append_bits(otp1.payload, pad0);
    append_bits(otp1.payload, pad1);
    res.transcript.messages.push_back(std::move(otp1));

    // Receiver reconstruction: the non-erased coordinate of every index, in
    // the order of the sent lists, matches S_B exactly.
    BitString s_hat(dims.phase1_key_bits);
    for (std::size_t k = 0; k < sent1.size(); ++k) {
        const std::uint32_t i = sent1[k];
        const int c1 = coord(ys[i], 0);
        s_hat.set(k, (c1 != 2 ? c1 : coord(ys[i], 1)) != 0);
    }
    for (std::size_t k = 0; k < sent2.size(); ++k) {
        const std::uint32_t i = sent2[k];
        const int c1 = coord(ys[i], 0);
        s_hat.set(sent1.size() + k, (c1 != 2 ? c1 : coord(ys[i], 1)) != 0);
    }
    BitString key1_hat = (inputs.choice == 0 ? pad0 : pad1) ^ s_hat;
    res.outcome.keys_sender.push_back(inputs.keys[0]);
    res.outcome.keys_receiver.push_back(std::move(key1_hat));
    res.outcome.decode_failed.push_back(false);

    // Phase 2: parity reveal over the erasure-free pool, then relabel into an
    // emulated channel that is erased or noiseless.
    BitString parities(i2.size());
    std::vector<int> x_em(i2.size());
    std::vector<channel::Symbol> y_em(i2.size());
    for (std::size_t k = 0; k < i2.size(); ++k) {
        const std::uint32_t i = i2[k];
        const int parity = x1[i] ^ x2[i];
        parities.set(k, parity != 0);
        const int xa = x1[i] ^ parity;
        int ya = coord(ys[i], 0);
        if (parity != 0) ya = 1 - ya;
        const auto use = channel::emulate_bsec_pair(xa, x2[i], ya, coord(ys[i], 1));
        x_em[k] = use.x;
        y_em[k] = use.y;
    }
    Message par;
    par.round = 2;
    par.dir = Dir::SenderToReceiver;
    par.tag = "parities";
    append_bits(par.payload, parities);
    res.transcript.messages.push_back(std::move(par));

    std::vector<std::uint32_t> kept, erased;
    for (std::size_t k = 0; k < y_em.size(); ++k) {
        if (y_em[k] == channel::kBsecErasure)
            erased.push_back(static_cast<std::uint32_t>(k));
        else
            kept.push_back(static_cast<std::uint32_t>(k));
    }
    if (kept.size() < dims.phase2_keep || erased.size() < dims.phase2_keep)
        return abort(2, "insufficient indices, round 2");

    IndexSets phase2;
    auto& slot_b = inputs.choice == 0 ? phase2.i0 : phase2.i1;
    auto& slot_nb = inputs.choice == 0 ? phase2.i1 : phase2.i0;
    slot_b.assign(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(dims.phase2_keep));
    slot_nb.assign(erased.begin(), erased.begin() + static_cast<std::ptrdiff_t>(dims.phase2_keep));
    push_index_message(2, phase2, res.transcript);

    BitString s2_0 = gather_bits(x_em, phase2.i0);
    BitString s2_1 = gather_bits(x_em, phase2.i1);
    const BitString pad2_0 = inputs.keys[1].first ^ s2_0;
    const BitString pad2_1 = inputs.keys[1].second ^ s2_1;
    Message otp2;
    otp2.round = 2;
    otp2.dir = Dir::SenderToReceiver;
    otp2.tag = "otp-phase2";
    append_bits(otp2.payload, pad2_0);
    append_bits(otp2.payload, pad2_1);
    res.transcript.messages.push_back(std::move(otp2));

    const BitString y_b = gather_symbols(y_em, slot_b);
    BitString key2_hat = (inputs.choice == 0 ? pad2_0 : pad2_1) ^ y_b;
    res.outcome.keys_sender.push_back(inputs.keys[1]);
    res.outcome.keys_receiver.push_back(std::move(key2_hat));
    res.outcome.decode_failed.push_back(false);

    res.outcome.rate = static_cast<double>(dims.phase1_key_bits + dims.phase2_key_bits) /
                       static_cast<double>(n);
    return res;
}

RunInputs make_inputs(const Schedule& schedule, Rng& key_rng, Rng& choice_rng) {
    RunInputs in;
    in.choice = choice_rng.bit();
    for (int t = 0; t < schedule.rounds; ++t)
        in.keys.push_back({key_rng.bits(schedule.ell[t]), key_rng.bits(schedule.ell[t])});
    return in;
}

RunInputs make_inputs_p3(std::size_t n, double delta, Rng& key_rng, Rng& choice_rng) {
    const auto dims = protocol3_dims(n, delta);
    RunInputs in;
    in.choice = choice_rng.bit();
    in.keys.push_back({key_rng.bits(dims.phase1_key_bits), key_rng.bits(dims.phase1_key_bits)});
    in.keys.push_back({key_rng.bits(dims.phase2_key_bits), key_rng.bits(dims.phase2_key_bits)});
    return in;
}

TrialStats estimate_correctness(const EstimateConfig& config) {
    if (config.trials == 0) throw std::invalid_argument("estimate_correctness: trials must be >= 1");

    struct TrialRecord {
        bool aborted = false;
        bool decode_failure = false;
        bool mismatch = false;
        double rate = 0.0;
        std::vector<double> phase_rates;
    };

    std::optional<Schedule> schedule;
    if (config.variant != Variant::P3) schedule = Schedule::derive(config.params);

    RunOptions opt = config.options;
    opt.collect_transcript = false;

    auto records = par::map_indexed<TrialRecord>(
        config.trials,
        [&](std::size_t trial) {
            auto streams = Streams::derive(config.master_seed, trial);
            Rng key_rng = Rng::derive(config.master_seed, trial, stream::kKeys);
            Rng choice_rng = Rng::derive(config.master_seed, trial, stream::kChoice);

            RunResult run;
            if (config.variant == Variant::P3) {
                const auto inputs = make_inputs_p3(config.params.n, config.params.delta, key_rng, choice_rng);
                run = run_protocol3(config.params.n, config.params.delta, inputs, streams, opt);
            } else {
                const auto inputs = make_inputs(*schedule, key_rng, choice_rng);
                run = config.variant == Variant::P1 ? run_protocol1(*schedule, inputs, streams, opt)
                                                    : run_protocol2(*schedule, inputs, streams, opt);
            }

            TrialRecord rec;
            rec.aborted = run.outcome.aborted;
            if (!rec.aborted) {
                rec.decode_failure = run.outcome.any_decode_failure();
                rec.mismatch = !run.outcome.keys_match();
                rec.rate = run.outcome.rate;
                const double n = static_cast<double>(config.params.n);
                for (const auto& key : run.outcome.keys_receiver)
                    rec.phase_rates.push_back(static_cast<double>(key.size()) / n);
            }
            return rec;
        },
        config.threads);

    TrialStats out;
    out.trials = config.trials;
    std::size_t completed = 0;
    for (const auto& rec : records) {
        out.aborts += rec.aborted ? 1 : 0;
        out.decode_failures += rec.decode_failure ? 1 : 0;
        out.key_mismatches += rec.mismatch ? 1 : 0;
        out.failures += (rec.aborted || rec.decode_failure || rec.mismatch) ? 1 : 0;
        out.mean_rate_all += rec.rate;
        if (!rec.aborted) {
            ++completed;
            out.mean_rate_completed += rec.rate;
            if (out.mean_phase_rates.size() < rec.phase_rates.size())
                out.mean_phase_rates.resize(rec.phase_rates.size(), 0.0);
            for (std::size_t k = 0; k < rec.phase_rates.size(); ++k)
                out.mean_phase_rates[k] += rec.phase_rates[k];
        }
    }
    out.mean_rate_all /= static_cast<double>(config.trials);
    if (completed > 0) {
        out.mean_rate_completed /= static_cast<double>(completed);
        for (auto& r : out.mean_phase_rates) r /= static_cast<double>(completed);
    }
    out.estimate = static_cast<double>(out.failures) / static_cast<double>(config.trials);
    out.wilson = stats::wilson(out.failures, config.trials);
    return out;
}

}  // namespace otforge::protocol

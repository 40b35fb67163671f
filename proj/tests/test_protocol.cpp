#include <doctest.h>

#include <cmath>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "otforge/ir_pa.hpp"
#include "otforge/protocol.hpp"

using namespace otforge;
using namespace otforge::protocol;

TEST_CASE("round schedule matches the displayed formulas") {
    ProtocolParams params{4000, 2, 0.05, 0.25, 0.05};
    const auto s = Schedule::derive(params);
    // Round 1: m = 4000*0.20, kappa = ceil(800*(H(0.05)+0.05)), l = 760-270.
    CHECK(s.m == std::vector<std::size_t>{800, 41});
    CHECK(s.n_t == std::vector<std::size_t>{900, 342});
    CHECK(s.kappa == std::vector<std::size_t>{270, 4});
    CHECK(s.ell == std::vector<std::size_t>{490, 34});
    CHECK(s.p[1] == doctest::Approx(0.095).epsilon(1e-12));
    CHECK(s.q[1] == doctest::Approx(0.0025 / 0.905).epsilon(1e-12));
    CHECK(s.total_key_bits() == 524);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(Schedule::derive({4001, 2, 0.05, 0.25, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::derive({4000, 0, 0.05, 0.25, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::derive({4000, 1, 0.05, 0.75, 0.05}), std::invalid_argument);
    CHECK_NOTHROW(Schedule::derive({4001, 1, 0.05, 0.25, 0.05}));
}

TEST_CASE("pure BSC start yields an empty first round") {
    const auto s = Schedule::derive({1000, 2, 0.05, 0.0, 0.1});
    CHECK(s.m[0] == 0);
    CHECK(s.kappa[0] == 0);
    CHECK(s.ell[0] == 0);
    CHECK(s.n_t[0] == 475);
    // Round 2 sees the emulated BSEC(0.18, 0.01/0.82).
    CHECK(s.p[1] == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(s.m[1] == static_cast<std::size_t>(std::ceil(475 * (0.18 - 0.05))));
}

TEST_CASE("discard sampling: erasures, p=1/2, p=0, and the p=1/4 rate") {
    Rng rng(31);
    CHECK(discard_sample(channel::kBsecErasure, 0.25, rng) == 1);
    for (int i = 0; i < 50; ++i) CHECK(discard_sample(0, 0.5, rng) == 0);
    for (int i = 0; i < 50; ++i) CHECK(discard_sample(1, 0.0, rng) == 2);

    std::size_t kept = 0;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) kept += discard_sample(0, 0.25, rng) == 0 ? 1 : 0;
    CHECK(std::fabs(static_cast<double>(kept) / n - 1.0 / 3.0) < 0.002);
}

TEST_CASE("index sets follow the first-m rule") {
    const std::vector<int> v{0, 1, 0, 1, 2, 2};
    const auto sets = build_index_sets(v, 1, 2, 1);
    REQUIRE(sets.has_value());
    CHECK(sets->i1 == std::vector<std::uint32_t>{0, 2});
    CHECK(sets->i0 == std::vector<std::uint32_t>{1, 3});
    CHECK(sets->i2 == std::vector<std::uint32_t>{4, 5});

    const auto swapped = build_index_sets(v, 0, 2, 1);
    REQUIRE(swapped.has_value());
    CHECK(swapped->i0 == sets->i1);
    CHECK(swapped->i1 == sets->i0);
    CHECK(swapped->i2 == sets->i2);
}

TEST_CASE("index sets abort when a pool is short") {
    const std::vector<int> v{2, 2, 2, 2};
    CHECK_FALSE(build_index_sets(v, 0, 1, 0).has_value());
    const std::vector<int> v2{0, 1, 0, 1};
    CHECK_FALSE(build_index_sets(v2, 0, 2, 1).has_value());
}

TEST_CASE("near-noiseless protocol 1 delivers the chosen key") {
    EstimateConfig cfg;
    cfg.variant = Variant::P1;
    cfg.params = {2000, 1, 0.05, 0.25, 1e-6};
    cfg.trials = 200;
    cfg.master_seed = 99;
    const auto stats = estimate_correctness(cfg);
    CHECK(static_cast<double>(stats.trials - stats.failures) / stats.trials >= 0.99);

    // Rate lands in [p(1-H(q)) - 3 delta, p(1-H(q))].
    const double target = 0.25 * (1.0 - ir_pa::binary_entropy(1e-6));
    CHECK(stats.mean_rate_completed >= target - 3 * 0.05);
    CHECK(stats.mean_rate_completed <= target);
}

TEST_CASE("fixed seeds give byte-identical transcripts and outcomes") {
    const auto schedule = Schedule::derive({600, 1, 0.1, 0.3, 0.01});
    auto run_once = [&]() {
        auto streams = Streams::derive(7, 0);
        Rng keys = Rng::derive(7, 0, stream::kKeys);
        Rng choice = Rng::derive(7, 0, stream::kChoice);
        const auto inputs = make_inputs(schedule, keys, choice);
        return run_protocol1(schedule, inputs, streams);
    };
    const auto a = run_once();
    const auto b = run_once();
    CHECK(a.transcript.message_bytes() == b.transcript.message_bytes());
    CHECK(a.transcript.to_json().dump() == b.transcript.to_json().dump());
    CHECK(a.outcome.keys_receiver == b.outcome.keys_receiver);
}

TEST_CASE("protocol 2 with one round reproduces protocol 1 under coupled randomness") {
    const auto schedule = Schedule::derive({600, 1, 0.1, 0.3, 0.01});
    auto streams1 = Streams::derive(13, 4);
    auto streams2 = Streams::derive(13, 4);
    Rng keys1 = Rng::derive(13, 4, stream::kKeys), keys2 = Rng::derive(13, 4, stream::kKeys);
    Rng ch1 = Rng::derive(13, 4, stream::kChoice), ch2 = Rng::derive(13, 4, stream::kChoice);
    const auto in1 = make_inputs(schedule, keys1, ch1);
    const auto in2 = make_inputs(schedule, keys2, ch2);
    const auto r1 = run_protocol1(schedule, in1, streams1);
    const auto r2 = run_protocol2(schedule, in2, streams2);
    CHECK(r1.transcript.message_bytes() == r2.transcript.message_bytes());
    CHECK(r1.outcome.keys_receiver == r2.outcome.keys_receiver);
    CHECK(r1.outcome.aborted == r2.outcome.aborted);
}

TEST_CASE("two-round run: round structure, sizes, and a live second round") {
    // q1 = 0.15 gives p2 = 0.255 > delta = 0.2, so round 2 transfers bits.
    ProtocolParams params{600, 2, 0.2, 0.25, 0.15};
    const auto schedule = Schedule::derive(params);
    REQUIRE(schedule.m[1] > 0);
    REQUIRE(schedule.ell[1] > 0);

    std::size_t completed = 0, matched = 0;
    for (std::uint64_t trial = 0; trial < 40; ++trial) {
        auto streams = Streams::derive(1234, trial);
        Rng keys = Rng::derive(1234, trial, stream::kKeys);
        Rng choice = Rng::derive(1234, trial, stream::kChoice);
        const auto inputs = make_inputs(schedule, keys, choice);
        const auto run = run_protocol2(schedule, inputs, streams);
        if (run.outcome.aborted) continue;
        ++completed;
        REQUIRE(run.outcome.keys_receiver.size() == 2);
        CHECK(run.outcome.keys_receiver[0].size() == schedule.ell[0]);
        CHECK(run.outcome.keys_receiver[1].size() == schedule.ell[1]);
        // Exactly one parity message, sized n_1, between the two rounds.
        std::size_t parity_msgs = 0;
        for (const auto& msg : run.transcript.messages)
            if (msg.tag == "parities") {
                ++parity_msgs;
                CHECK(msg.round == 1);
            }
        CHECK(parity_msgs == 1);
        matched += run.outcome.keys_match() ? 1 : 0;
    }
    CHECK(completed >= 35);
    // Short blocks keep some decode ambiguity; require a clear majority only.
    CHECK(static_cast<double>(matched) / completed >= 0.6);
}

TEST_CASE("schedule rate sits within the coarse window around the two-round bound") {
    ProtocolParams params{4000, 2, 0.05, 0.25, 0.05};
    const auto schedule = Schedule::derive(params);
    const double rate =
        static_cast<double>(schedule.total_key_bits()) / static_cast<double>(schedule.n0);
    // Independent term-by-term evaluation of the two-round bound.
    const double h1 = ir_pa::binary_entropy(0.05);
    const double p2 = 2 * 0.05 * 0.95;
    const double q2 = 0.05 * 0.05 / (0.95 * 0.95 + 0.05 * 0.05);
    const double bound = 0.25 * (1 - h1) + ((1 - 2 * 0.25) / 2.0) * p2 * (1 - ir_pa::binary_entropy(q2));
    const double window = 3 * 0.05 * (1 + (1 - 2 * 0.25) / 2.0);
    CHECK(rate >= bound - window);
    CHECK(rate <= bound);
}

TEST_CASE("abort paths surface the round number") {
    // n=2, p=0.5: two erasures leave the kept pool empty and abort round 1.
    const auto schedule = Schedule::derive({2, 1, 0.05, 0.5, 0.25});
    bool saw_abort = false;
    for (std::uint64_t trial = 0; trial < 64 && !saw_abort; ++trial) {
        auto streams = Streams::derive(5, trial);
        Rng keys = Rng::derive(5, trial, stream::kKeys);
        Rng choice = Rng::derive(5, trial, stream::kChoice);
        const auto inputs = make_inputs(schedule, keys, choice);
        const auto run = run_protocol1(schedule, inputs, streams);
        if (run.outcome.aborted) {
            saw_abort = true;
            CHECK(run.outcome.abort_round == 1);
            CHECK(run.outcome.abort_reason == "insufficient indices, round 1");
            CHECK(run.outcome.rate == 0.0);
        }
    }
    CHECK(saw_abort);
}

TEST_CASE("estimate_correctness is reproducible") {
    EstimateConfig cfg;
    cfg.variant = Variant::P1;
    cfg.params = {400, 1, 0.1, 0.3, 0.01};
    cfg.trials = 64;
    cfg.master_seed = 2024;
    const auto a = estimate_correctness(cfg);
    const auto b = estimate_correctness(cfg);
    CHECK(a.failures == b.failures);
    CHECK(a.mean_rate_completed == b.mean_rate_completed);
}

TEST_CASE("leak mutation grows the second message") {
    const auto schedule = Schedule::derive({400, 1, 0.1, 0.3, 0.01});
    auto get_pi2_size = [&](Mutation mut) {
        auto streams = Streams::derive(3, 0);
        Rng keys = Rng::derive(3, 0, stream::kKeys);
        Rng choice = Rng::derive(3, 0, stream::kChoice);
        const auto inputs = make_inputs(schedule, keys, choice);
        RunOptions opt;
        opt.mutation = mut;
        const auto run = run_protocol1(schedule, inputs, streams, opt);
        for (const auto& msg : run.transcript.messages)
            if (msg.tag == "otp-and-checks") return msg.payload.size();
        return std::size_t{0};
    };
    CHECK(get_pi2_size(Mutation::LeakSbar) == get_pi2_size(Mutation::None) + 2);
}

// Exact conditional hiding: for each fixed X^n, the first-message distribution
// is identical under B=0 and B=1 once channel noise and discard randomness are
// marginalized. Mirrors the exact-enumeration oracle at a single fixed input.
TEST_CASE("index-set message distribution is independent of the choice bit given X") {
    using Rational = boost::multiprecision::cpp_rational;
    const std::size_t n = 4;
    const Rational p(1, 4), q(1, 4);
    const Rational probs[5] = {p, p * (1 - q), p * q, (1 - 2 * p) * (1 - q), (1 - 2 * p) * q};

    for (std::uint64_t xbits : {0b0000ull, 0b1010ull, 0b0111ull}) {
        std::map<std::string, Rational> dist[2];
        ExplicitRound round;
        round.m = 1;
        round.kappa = 1;
        round.ell = 1;
        round.k0 = BitString(1);
        round.k1 = BitString(1);
        round.key_seed = hashing::HashSeed(1, 1, BitString::from_bits({1}));
        round.check_seed = hashing::HashSeed(1, 1, BitString::from_bits({1}));
        round.x.resize(n);
        round.y.resize(n);
        round.v.resize(n);
        for (std::size_t i = 0; i < n; ++i) round.x[i] = static_cast<int>((xbits >> i) & 1);

        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= 5;
        for (std::size_t branch = 0; branch < total; ++branch) {
            std::size_t rem = branch;
            Rational prob = 1;
            for (std::size_t i = 0; i < n; ++i) {
                const int b = static_cast<int>(rem % 5);
                rem /= 5;
                prob *= probs[b];
                const int flip = (b == 2 || b == 4) ? 1 : 0;
                round.y[i] = b == 0 ? channel::kBsecErasure
                                    : static_cast<channel::Symbol>(round.x[i] ^ flip);
                round.v[i] = b == 0 ? 1 : (b <= 2 ? 0 : 2);
            }
            for (int choice = 0; choice < 2; ++choice) {
                round.choice = choice;
                const auto tr = protocol1_messages(round);
                std::string key;
                for (const auto& msg : tr.messages) {
                    if (msg.tag != "round-indices" && msg.tag != "abort") continue;
                    key += msg.tag;
                    key.append(msg.payload.begin(), msg.payload.end());
                }
                dist[choice][key] += prob;
            }
        }
        CHECK(dist[0] == dist[1]);
    }
}

TEST_CASE("protocol 3 dimensions and floors") {
    const auto dims = protocol3_dims(100000, 0.01);
    CHECK(dims.pool_erase == 24000);
    CHECK(dims.pool_pairs == 49000);
    CHECK(dims.phase1_key_bits == 48000);
    CHECK(dims.phase2_key_bits == 24000);
    CHECK_THROWS_AS(protocol3_dims(100, 0.3), std::invalid_argument);
}

TEST_CASE("protocol 3 delivers both phases exactly") {
    const std::size_t n = 20000;
    const double delta = 0.02;
    int seen_choice[2] = {0, 0};
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        auto streams = Streams::derive(77, trial);
        Rng keys = Rng::derive(77, trial, stream::kKeys);
        Rng choice = Rng::derive(77, trial, stream::kChoice);
        const auto inputs = make_inputs_p3(n, delta, keys, choice);
        const auto run = run_protocol3(n, delta, inputs, streams);
        REQUIRE_FALSE(run.outcome.aborted);
        ++seen_choice[inputs.choice];
        // The single-erasure pools expose their non-erased coordinate intact
        // and phase 2's emulated channel is erased-or-noiseless, so recovery
        // is exact for both phases.
        CHECK(run.outcome.keys_match());
        CHECK(run.outcome.rate == doctest::Approx(0.69).epsilon(1e-12));
        CHECK(run.outcome.keys_receiver[0].size() == 2 * 4600);
        CHECK(run.outcome.keys_receiver[1].size() == 4600);
    }
    CHECK(seen_choice[0] > 0);
    CHECK(seen_choice[1] > 0);
}

TEST_CASE("protocol 3 key length validation") {
    auto streams = Streams::derive(1, 0);
    RunInputs bad;
    bad.choice = 0;
    bad.keys.push_back({BitString(3), BitString(3)});
    bad.keys.push_back({BitString(2), BitString(2)});
    CHECK_THROWS_AS(run_protocol3(1000, 0.01, bad, streams), std::invalid_argument);
}

TEST_CASE("transcript views split inputs and outputs") {
    const auto schedule = Schedule::derive({100, 1, 0.1, 0.3, 0.1});
    auto streams = Streams::derive(21, 0);
    Rng keys = Rng::derive(21, 0, stream::kKeys);
    Rng choice = Rng::derive(21, 0, stream::kChoice);
    const auto inputs = make_inputs(schedule, keys, choice);
    const auto run = run_protocol1(schedule, inputs, streams);
    const auto sender = run.transcript.sender_view();
    const auto receiver = run.transcript.receiver_view(inputs.choice);
    CHECK(sender["uses"][0].contains("in"));
    CHECK_FALSE(sender["uses"][0].contains("out"));
    CHECK(receiver["uses"][0].contains("out"));
    CHECK_FALSE(receiver["uses"][0].contains("in"));
    CHECK(receiver["choice"] == inputs.choice);
    CHECK(sender["messages"].size() == receiver["messages"].size());
}

#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "otforge/channel.hpp"

using namespace otforge;
using namespace otforge::channel;

TEST_CASE("bsec matrix entries follow the displayed formulas") {
    const auto spec = make_bsec(BsecParams(0.1, 0.2));
    CHECK(spec.prob(0, 0) == doctest::Approx(0.72).epsilon(1e-12));
    CHECK(spec.prob(0, 1) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(spec.prob(0, 2) == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(spec.output_label(2) == "e");
}

TEST_CASE("bsec with p=0 embeds a pure BSC") {
    const auto spec = make_bsec(BsecParams(0.0, 0.3));
    CHECK(spec.prob(0, 2) == 0.0);
    CHECK(spec.prob(1, 2) == 0.0);
    CHECK(spec.prob(0, 1) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("bsec at p=q=1/2 is the symmetric corner") {
    const auto spec = make_bsec(BsecParams(0.5, 0.5));
    for (Symbol x = 0; x < 2; ++x) {
        CHECK(spec.prob(x, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(spec.prob(x, 1) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(spec.prob(x, 2) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("bsec symmetry: swapping 0/1 in the row for 0 gives the row for 1") {
    for (auto [p, q] : {std::pair{0.3, 0.2}, std::pair{0.1, 0.45}, std::pair{0.5, 0.01}}) {
        const auto spec = make_bsec(BsecParams(p, q));
        CHECK(spec.prob(0, 0) == spec.prob(1, 1));
        CHECK(spec.prob(0, 1) == spec.prob(1, 0));
        CHECK(spec.prob(0, 2) == spec.prob(1, 2));
    }
}

TEST_CASE("bsec params are validated") {
    CHECK_THROWS_AS(BsecParams(0.6, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(BsecParams(-0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(BsecParams(0.1, 1.0), std::invalid_argument);
}

TEST_CASE("channel spec rejects malformed matrices") {
    CHECK_THROWS_AS(ChannelSpec({"0", "1"}, {"a", "b"}, {{0.5, 0.6}, {0.5, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ChannelSpec({"0", "0"}, {"a", "b"}, {{0.5, 0.5}, {0.5, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ChannelSpec({"0", "1"}, {"a", "b"}, {{1.5, -0.5}, {0.5, 0.5}}),
                    std::invalid_argument);
}

TEST_CASE("example channel rows match the five-entry pattern") {
    const auto spec = make_example1();
    REQUIRE(spec.num_inputs() == 4);
    REQUIRE(spec.num_outputs() == 9);
    const auto x = *spec.input_index("00");
    CHECK(spec.prob(x, *spec.output_index("0e")) == 0.25);
    CHECK(spec.prob(x, *spec.output_index("e0")) == 0.25);
    CHECK(spec.prob(x, *spec.output_index("00")) == 0.25);
    CHECK(spec.prob(x, *spec.output_index("01")) == 0.125);
    CHECK(spec.prob(x, *spec.output_index("10")) == 0.125);
    CHECK(spec.prob(x, *spec.output_index("ee")) == 0.0);
    CHECK(spec.prob(x, *spec.output_index("11")) == 0.0);
    for (Symbol row = 0; row < 4; ++row) {
        double sum = 0.0;
        for (Symbol y = 0; y < 9; ++y) sum += spec.prob(row, y);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sampling a noiseless bsec is the identity") {
    const auto spec = make_bsec(BsecParams(0.0, 0.0));
    Rng rng(1);
    const std::vector<Symbol> in{0, 1, 0, 1};
    const auto s = sample(spec, in, rng);
    CHECK(s.outputs == in);
}

TEST_CASE("sampling rejects unknown input symbols") {
    const auto spec = make_bsec(BsecParams(0.1, 0.1));
    Rng rng(1);
    const std::vector<Symbol> in{0, 7};
    CHECK_THROWS_AS(sample(spec, in, rng), std::invalid_argument);
}

TEST_CASE("sampling is reproducible for a fixed stream") {
    const auto spec = make_bsec(BsecParams(0.3, 0.2));
    std::vector<Symbol> in(1000);
    Rng in_rng(3);
    for (auto& s : in) s = static_cast<Symbol>(in_rng.bit());
    Rng a(42), b(42);
    CHECK(sample(spec, in, a).outputs == sample(spec, in, b).outputs);
}

TEST_CASE("monte carlo erasure and crossover frequencies match the matrix row") {
    const auto spec = make_bsec(BsecParams(0.3, 0.1));
    Rng rng(101);
    const std::size_t n = 1'000'000;
    std::size_t erased = 0, flipped = 0, kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Symbol x = static_cast<Symbol>(rng.bit());
        const Symbol y = spec.sample_one(x, rng);
        if (y == kBsecErasure)
            ++erased;
        else {
            ++kept;
            flipped += (y != x) ? 1 : 0;
        }
    }
    CHECK(std::fabs(static_cast<double>(erased) / n - 0.3) < 0.005);
    CHECK(std::fabs(static_cast<double>(flipped) / kept - 0.1) < 0.005);
}

TEST_CASE("half-erasure channel still shows the right conditional crossover") {
    const auto spec = make_bsec(BsecParams(0.5, 0.2));
    Rng rng(102);
    const std::size_t n = 1'000'000;
    std::size_t flipped = 0, kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Symbol x = static_cast<Symbol>(rng.bit());
        const Symbol y = spec.sample_one(x, rng);
        if (y != kBsecErasure) {
            ++kept;
            flipped += (y != x) ? 1 : 0;
        }
    }
    CHECK(std::fabs(static_cast<double>(flipped) / kept - 0.2) < 0.005);
}

TEST_CASE("pair emulation relabels aligned pairs") {
    CHECK(emulate_bsec_pair(1, 1, 1, 1).x == 1);
    CHECK(emulate_bsec_pair(1, 1, 1, 1).y == 1);
    CHECK(emulate_bsec_pair(0, 0, 0, 1).x == 0);
    CHECK(emulate_bsec_pair(0, 0, 0, 1).y == kBsecErasure);
    CHECK_THROWS_AS(emulate_bsec_pair(0, 1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(emulate_bsec_pair(0, 0, 2, 0), std::invalid_argument);
}

TEST_CASE("emulated parameters: fixed point and closed forms") {
    const auto fp = emulated_params(0.5);
    CHECK(fp.p_next == 0.5);
    CHECK(fp.q_next == 0.5);
    const auto a = emulated_params(0.25);
    CHECK(a.p_next == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(a.q_next == doctest::Approx(0.1).epsilon(1e-15));
    const auto b = emulated_params(0.1);
    CHECK(b.p_next == doctest::Approx(0.18).epsilon(1e-15));
    CHECK(b.q_next == doctest::Approx(0.01 / 0.82).epsilon(1e-15));
    CHECK_THROWS_AS(emulated_params(0.0), std::invalid_argument);
    CHECK_THROWS_AS(emulated_params(1.0), std::invalid_argument);
}

// Composition oracle: the emulated channel's empirical statistics over real
// BSC pairs must match the recursion's closed forms.
TEST_CASE("monte carlo composition of pair emulation matches the recursion") {
    Rng rng(7);
    const double q = 0.1;
    const std::size_t n = 1'000'000;
    std::size_t erased = 0, flipped = 0, kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int x = rng.bit();
        const int y1 = x ^ (rng.bernoulli(q) ? 1 : 0);
        const int y2 = x ^ (rng.bernoulli(q) ? 1 : 0);
        const auto use = emulate_bsec_pair(x, x, y1, y2);
        if (use.y == kBsecErasure)
            ++erased;
        else {
            ++kept;
            flipped += (use.y != x) ? 1 : 0;
        }
    }
    const auto expect = emulated_params(q);
    const double se_p = std::sqrt(expect.p_next * (1 - expect.p_next) / n);
    const double se_q = std::sqrt(expect.q_next * (1 - expect.q_next) / kept);
    CHECK(std::fabs(static_cast<double>(erased) / n - expect.p_next) < 4 * se_p);
    CHECK(std::fabs(static_cast<double>(flipped) / kept - expect.q_next) < 4 * se_q);
}

TEST_CASE("emulated probabilities stay normalized") {
    for (double q : {0.05, 0.3, 0.5, 0.77, 0.99}) {
        const auto e = emulated_params(q);
        const double total = e.p_next + (1 - e.p_next) * e.q_next + (1 - e.p_next) * (1 - e.q_next);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("channel spec json round trip") {
    const auto spec = make_example1();
    const auto back = ChannelSpec::from_json(spec.to_json());
    CHECK(back.input_labels() == spec.input_labels());
    CHECK(back.output_labels() == spec.output_labels());
    CHECK(back.matrix() == spec.matrix());
}

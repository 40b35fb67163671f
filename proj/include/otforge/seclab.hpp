#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "otforge/protocol.hpp"
#include "otforge/stats.hpp"

namespace otforge::seclab {

using Rational = boost::multiprecision::cpp_rational;

// Tiny-instance configuration for exact enumeration. Channel and discard
// probabilities are rationals so every atom probability is exact.
struct ExactConfig {
    std::int64_t p_num = 1, p_den = 4;  // erasure probability
    std::int64_t q_num = 1, q_den = 4;  // crossover probability
    std::size_t n = 4;
    std::size_t m = 1;
    std::size_t kappa = 1;
    std::size_t ell = 1;
    protocol::Mutation mutation = protocol::Mutation::None;
    int threads = 0;
};

struct ExactResult {
    Rational distance;       // d_var of the sender view joint vs product
    std::uint64_t atoms = 0;
    double distance_double() const;
    std::string distance_string() const;
    bool is_zero() const { return distance == 0; }
};

// Enumerates every (B, K0, K1, X^n, channel/discard branch, hash seeds) atom
// with exact rational probability, computes the transcript deterministically
// for each, and returns d_var(P_{B K0 K1 X Pi}, P_B x P_{K0 K1 X Pi}) exactly.
// Instances above the 1e8-atom guard are refused.
ExactResult exact_receiver_privacy(const ExactConfig& config);

// Per-symbol discard symmetry P(V=0|x) = P(V=1|x) = p, checked in exact
// rational arithmetic. `shift` perturbs the keep probability p/(1-p).
struct VSymmetryResult {
    Rational prob_v0;
    Rational prob_v1;
    bool symmetric = false;
};
VSymmetryResult exact_v_symmetry(std::int64_t p_num, std::int64_t p_den,
                                 std::int64_t shift_num = 0, std::int64_t shift_den = 1);

struct SecurityReport {
    std::string criterion;  // correctness | sender_security | receiver_privacy
    std::string method;     // enumeration | monte_carlo
    double value = 0.0;
    stats::Interval interval;
    bool exact = false;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    bool pass = true;
    nlohmann::json details_;
    nlohmann::json to_json() const;
};

struct SenderSecurityConfig {
    std::size_t n = 400;
    std::size_t m = 150;
    std::size_t kappa = 130;
    std::size_t ell = 2;
    double p = 0.5;
    double q = 0.25;
    double delta = 0.05;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    int threads = 0;
    protocol::Mutation mutation = protocol::Mutation::None;
    std::uint64_t decode_budget = 100000;
};

// Chi-squared independence test between K_{1-B} and a low-dimensional digest
// of the receiver view, plus a plug-in variational distance with a bootstrap
// interval. A digest-based test is weaker than the full definition; it guards
// against gross leakage only.
SecurityReport sender_security_test(const SenderSecurityConfig& config);

// protocol::estimate_correctness wrapped into the report schema.
SecurityReport correctness_report(const protocol::EstimateConfig& config);

SecurityReport receiver_privacy_report(const ExactConfig& config);

}  // namespace otforge::seclab

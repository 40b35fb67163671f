#include "otforge/seclab.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "otforge/parallel.hpp"

namespace otforge::seclab {

namespace {

// Branches of one channel use combined with the discard draw. Probabilities:
//   Erased:      p           (V = 1)
//   KeptSame:    p(1-q)      (V = 0, y = x)
//   KeptFlip:    pq          (V = 0, y = 1-x)
//   PassSame:    (1-2p)(1-q) (V = 2, y = x)
//   PassFlip:    (1-2p)q     (V = 2, y = 1-x)
enum Branch : int { Erased = 0, KeptSame, KeptFlip, PassSame, PassFlip, kBranches };

struct BranchTables {
    std::array<Rational, kBranches> prob;
};

BranchTables make_branches(const ExactConfig& cfg) {
    if (cfg.p_den <= 0 || cfg.q_den <= 0)
        throw std::invalid_argument("exact enumeration: denominators must be positive");
    const Rational p(cfg.p_num, cfg.p_den);
    const Rational q(cfg.q_num, cfg.q_den);
    if (p <= 0 || p > Rational(1, 2))
        throw std::invalid_argument("exact enumeration: p must satisfy 0 < p <= 1/2");
    if (q < 0 || q >= 1) throw std::invalid_argument("exact enumeration: q must satisfy 0 <= q < 1");
    BranchTables t;
    t.prob[Erased] = p;
    t.prob[KeptSame] = p * (1 - q);
    t.prob[KeptFlip] = p * q;
    t.prob[PassSame] = (1 - 2 * p) * (1 - q);
    t.prob[PassFlip] = (1 - 2 * p) * q;
    return t;
}

std::uint64_t pow_u64(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

using Dist = std::map<std::string, Rational>;

}  // namespace

double ExactResult::distance_double() const { return distance.convert_to<double>(); }

std::string ExactResult::distance_string() const { return distance.str(); }

ExactResult exact_receiver_privacy(const ExactConfig& cfg) {
    const std::size_t flen = cfg.m + cfg.ell - 1;
    const std::size_t glen = cfg.m + cfg.kappa - 1;
    const std::uint64_t seed_atoms = pow_u64(2, flen) * pow_u64(2, glen);
    const std::uint64_t key_atoms = pow_u64(2, 2 * cfg.ell);
    const std::uint64_t x_atoms = pow_u64(2, cfg.n);
    const std::uint64_t branch_atoms = pow_u64(kBranches, cfg.n);
    const std::uint64_t total = 2 * key_atoms * x_atoms * branch_atoms * seed_atoms;
    if (total > 100'000'000ull)
        throw std::invalid_argument("exact_receiver_privacy: instance needs " + std::to_string(total) +
                                    " atoms, above the 1e8 guard");

    const auto branches = make_branches(cfg);
    const Rational base_prob = Rational(1, 2) / Rational(key_atoms) / Rational(x_atoms) /
                               Rational(pow_u64(2, flen + glen));

    // Outermost coordinate: (b, k0, k1, x). Each group enumerates channel
    // branches and seeds; rational reduction is exact, so merge order only
    // needs to be deterministic, not meaningful.
    const std::uint64_t groups = 2 * key_atoms * x_atoms;

    struct GroupDists {
        Dist joint;  // key: b byte + rest bytes
        Dist rest;
    };

    auto group_results = par::map_indexed<GroupDists>(
        groups,
        [&](std::size_t g) {
            GroupDists out;
            std::uint64_t rem = g;
            const int b = static_cast<int>(rem % 2);
            rem /= 2;
            std::uint64_t k0_bits = rem % pow_u64(2, cfg.ell);
            rem /= pow_u64(2, cfg.ell);
            std::uint64_t k1_bits = rem % pow_u64(2, cfg.ell);
            rem /= pow_u64(2, cfg.ell);
            std::uint64_t x_bits = rem;

            protocol::ExplicitRound round;
            round.m = cfg.m;
            round.kappa = cfg.kappa;
            round.ell = cfg.ell;
            round.choice = b;
            round.mutation = cfg.mutation;
            round.k0 = BitString(cfg.ell);
            round.k1 = BitString(cfg.ell);
            for (std::size_t i = 0; i < cfg.ell; ++i) {
                round.k0.set(i, (k0_bits >> i) & 1);
                round.k1.set(i, (k1_bits >> i) & 1);
            }
            round.x.resize(cfg.n);
            for (std::size_t i = 0; i < cfg.n; ++i) round.x[i] = static_cast<int>((x_bits >> i) & 1);
            round.y.resize(cfg.n);
            round.v.resize(cfg.n);

            std::string rest_prefix;
            rest_prefix.push_back(static_cast<char>(cfg.ell > 0 ? k0_bits : 0));
            rest_prefix.push_back(static_cast<char>(cfg.ell > 0 ? k1_bits : 0));
            rest_prefix.push_back(static_cast<char>(x_bits & 0xFF));
            rest_prefix.push_back(static_cast<char>((x_bits >> 8) & 0xFF));

            std::vector<int> branch(cfg.n, 0);
            const std::uint64_t branch_total = pow_u64(kBranches, cfg.n);
            for (std::uint64_t bi = 0; bi < branch_total; ++bi) {
                std::uint64_t v = bi;
                Rational branch_prob = base_prob;
                for (std::size_t i = 0; i < cfg.n; ++i) {
                    branch[i] = static_cast<int>(v % kBranches);
                    v /= kBranches;
                    branch_prob *= branches.prob[branch[i]];
                    switch (branch[i]) {
                        case Erased:
                            round.y[i] = channel::kBsecErasure;
                            round.v[i] = 1;
                            break;
                        case KeptSame:
                            round.y[i] = static_cast<channel::Symbol>(round.x[i]);
                            round.v[i] = 0;
                            break;
                        case KeptFlip:
                            round.y[i] = static_cast<channel::Symbol>(1 - round.x[i]);
                            round.v[i] = 0;
                            break;
                        case PassSame:
                            round.y[i] = static_cast<channel::Symbol>(round.x[i]);
                            round.v[i] = 2;
                            break;
                        default:
                            round.y[i] = static_cast<channel::Symbol>(1 - round.x[i]);
                            round.v[i] = 2;
                            break;
                    }
                }
                if (branch_prob == 0) continue;
                for (std::uint64_t fd = 0; fd < pow_u64(2, flen); ++fd) {
                    BitString fdiag(flen);
                    for (std::size_t i = 0; i < flen; ++i) fdiag.set(i, (fd >> i) & 1);
                    round.key_seed = hashing::HashSeed(cfg.m, cfg.ell, fdiag);
                    for (std::uint64_t gd = 0; gd < pow_u64(2, glen); ++gd) {
                        BitString gdiag(glen);
                        for (std::size_t i = 0; i < glen; ++i) gdiag.set(i, (gd >> i) & 1);
                        round.check_seed = hashing::HashSeed(cfg.m, cfg.kappa, gdiag);

                        const auto transcript = protocol::protocol1_messages(round);
                        const auto bytes = transcript.message_bytes();
                        std::string rest = rest_prefix;
                        rest.append(bytes.begin(), bytes.end());
                        out.rest[rest] += branch_prob;
                        out.joint[static_cast<char>(b) + rest] += branch_prob;
                    }
                }
            }
            return out;
        },
        cfg.threads);

    Dist joint, rest;
    for (auto& g : group_results) {
        for (auto& [k, p] : g.joint) joint[k] += p;
        for (auto& [k, p] : g.rest) rest[k] += p;
    }

    Rational check_sum = 0;
    for (const auto& [k, p] : rest) check_sum += p;
    if (check_sum != 1)
        throw std::logic_error("exact_receiver_privacy: atom probabilities do not sum to 1");

    const Rational half(1, 2);
    Rational dist = 0;
    for (const auto& [rest_key, rest_prob] : rest) {
        for (int b = 0; b < 2; ++b) {
            std::string k;
            k.push_back(static_cast<char>(b));
            k += rest_key;
            Rational jp = 0;
            if (auto it = joint.find(k); it != joint.end()) jp = it->second;
            const Rational diff = jp - half * rest_prob;
            dist += diff < 0 ? -diff : diff;
        }
    }
    ExactResult res;
    res.distance = dist * half;
    res.atoms = total;
    return res;
}

VSymmetryResult exact_v_symmetry(std::int64_t p_num, std::int64_t p_den, std::int64_t shift_num,
                                 std::int64_t shift_den) {
    const Rational p(p_num, p_den);
    if (p <= 0 || p > Rational(1, 2))
        throw std::invalid_argument("exact_v_symmetry: p must satisfy 0 < p <= 1/2");
    const Rational keep = p / (1 - p) + Rational(shift_num, shift_den);
    VSymmetryResult out;
    out.prob_v0 = (1 - p) * keep;  // non-erased and assigned V=0
    out.prob_v1 = p;               // erased
    out.symmetric = out.prob_v0 == out.prob_v1;
    return out;
}

nlohmann::json SecurityReport::to_json() const {
    nlohmann::json j{{"criterion", criterion},
                     {"method", method},
                     {"value", value},
                     {"interval", {interval.lo, interval.hi}},
                     {"exact", exact},
                     {"trials", trials},
                     {"seed", seed},
                     {"pass", pass}};
    if (!details_.is_null()) j["details"] = details_;
    return j;
}

SecurityReport sender_security_test(const SenderSecurityConfig& cfg) {
    if (cfg.ell == 0) {
        // Zero-length keys are vacuously independent of the view.
        SecurityReport rep;
        rep.criterion = "sender_security";
        rep.method = "monte_carlo";
        rep.value = 0.0;
        rep.interval = {0.0, 0.0};
        rep.trials = cfg.trials;
        rep.seed = cfg.seed;
        rep.pass = true;
        rep.details_ = nlohmann::json{{"note", "zero-length keys, distance 0"}};
        return rep;
    }
    if (cfg.ell > 4)
        throw std::invalid_argument("sender_security_test: need l <= 4 for test power");
    if (cfg.ell + cfg.kappa > cfg.m)
        throw std::invalid_argument("sender_security_test: l + kappa must not exceed m");
    // The privacy-amplification rule l <= floor(m(1-delta)) - kappa must hold
    // for the instance to be meaningful.
    {
        const auto pa = ir_pa::PaParams::derive(cfg.m, cfg.delta, cfg.kappa);
        if (cfg.ell > pa.key_len)
            throw std::invalid_argument("sender_security_test: l exceeds the amplification rule");
    }

    protocol::Schedule sch;
    sch.n0 = cfg.n;
    sch.rounds = 1;
    sch.delta = cfg.delta;
    sch.p = {cfg.p};
    sch.q = {cfg.q};
    sch.n_t = {0};
    sch.m = {cfg.m};
    sch.kappa = {cfg.kappa};
    sch.ell = {cfg.ell};
    sch.w_max = {ir_pa::IrParams::derive(cfg.m, cfg.q, cfg.delta).weight_cap};

    const std::size_t key_values = std::size_t{1} << cfg.ell;
    constexpr std::size_t kBuckets = 16;

    struct TrialOut {
        bool aborted = true;
        std::size_t key = 0;
        std::size_t bucket = 0;
    };

    auto trials = par::map_indexed<TrialOut>(
        cfg.trials,
        [&](std::size_t trial) {
            auto streams = protocol::Streams::derive(cfg.seed, trial);
            Rng key_rng = Rng::derive(cfg.seed, trial, stream::kKeys);
            Rng choice_rng = Rng::derive(cfg.seed, trial, stream::kChoice);
            const auto inputs = protocol::make_inputs(sch, key_rng, choice_rng);
            protocol::RunOptions opt;
            opt.mutation = cfg.mutation;
            opt.decode_budget = cfg.decode_budget;
            opt.collect_transcript = true;
            const auto run = protocol::run_protocol1(sch, inputs, streams, opt);
            TrialOut out;
            if (run.outcome.aborted) return out;
            out.aborted = false;

            const BitString& k_bar =
                inputs.choice == 0 ? run.outcome.keys_sender[0].second : run.outcome.keys_sender[0].first;
            for (std::size_t i = 0; i < k_bar.size(); ++i)
                out.key |= static_cast<std::size_t>(k_bar.get(i)) << i;

            // Receiver-view digest: choice bit, erasure count, decoded key or
            // failure marker, first pad bits, and any extra trailing payload
            // bytes of the second message (the leak target lives there).
            std::uint64_t h = 0x9e3779b97f4a7c15ull;
            auto mix = [&h](std::uint64_t v) {
                h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            };
            mix(static_cast<std::uint64_t>(inputs.choice));
            std::size_t erasures = 0;
            for (const auto& use : run.transcript.uses)
                erasures += use.output == channel::kBsecErasure ? 1 : 0;
            mix(erasures % 4);
            if (run.outcome.decode_failed[0]) {
                mix(0xFF);
            } else {
                std::uint64_t kv = 0;
                const auto& k_hat = run.outcome.keys_receiver[0];
                for (std::size_t i = 0; i < k_hat.size(); ++i)
                    kv |= static_cast<std::uint64_t>(k_hat.get(i)) << i;
                mix(kv);
            }
            for (const auto& msg : run.transcript.messages) {
                if (msg.tag != "otp-and-checks") continue;
                if (!msg.payload.empty()) {
                    mix(msg.payload[8]);  // first pad byte (after the length header)
                    mix(msg.payload.back());
                    mix(msg.payload[msg.payload.size() - 2]);
                }
            }
            out.bucket = static_cast<std::size_t>(h % kBuckets);
            return out;
        },
        cfg.threads);

    std::vector<std::vector<std::uint64_t>> table(key_values, std::vector<std::uint64_t>(kBuckets, 0));
    std::uint64_t aborted = 0, completed = 0;
    for (const auto& t : trials) {
        if (t.aborted) {
            ++aborted;
            continue;
        }
        ++completed;
        table[t.key][t.bucket] += 1;
    }

    const auto chi2 = stats::chi2_independence(table);

    // Plug-in variational distance between the empirical joint and the product
    // of its marginals, with a bootstrap percentile interval.
    auto dvar_of = [&](const std::vector<std::vector<std::uint64_t>>& tab, double total) {
        std::vector<double> row(key_values, 0.0), col(kBuckets, 0.0);
        for (std::size_t i = 0; i < key_values; ++i)
            for (std::size_t j = 0; j < kBuckets; ++j) {
                row[i] += static_cast<double>(tab[i][j]);
                col[j] += static_cast<double>(tab[i][j]);
            }
        double d = 0.0;
        for (std::size_t i = 0; i < key_values; ++i)
            for (std::size_t j = 0; j < kBuckets; ++j)
                d += std::fabs(static_cast<double>(tab[i][j]) / total -
                               (row[i] / total) * (col[j] / total));
        return d / 2.0;
    };
    const double dvar = completed > 0 ? dvar_of(table, static_cast<double>(completed)) : 0.0;

    stats::Interval boot{dvar, dvar};
    if (completed > 0) {
        std::vector<std::pair<std::size_t, std::size_t>> samples;
        samples.reserve(completed);
        for (const auto& t : trials)
            if (!t.aborted) samples.push_back({t.key, t.bucket});
        Rng boot_rng = Rng::derive(cfg.seed, 0xB007, stream::kOracle);
        std::vector<double> reps;
        for (int r = 0; r < 200; ++r) {
            std::vector<std::vector<std::uint64_t>> tab(key_values,
                                                        std::vector<std::uint64_t>(kBuckets, 0));
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const auto& s = samples[boot_rng.below(samples.size())];
                tab[s.first][s.second] += 1;
            }
            reps.push_back(dvar_of(tab, static_cast<double>(samples.size())));
        }
        std::sort(reps.begin(), reps.end());
        boot.lo = reps[static_cast<std::size_t>(0.025 * 199)];
        boot.hi = reps[static_cast<std::size_t>(0.975 * 199)];
    }

    SecurityReport rep;
    rep.criterion = "sender_security";
    rep.method = "monte_carlo";
    rep.value = dvar;
    rep.interval = boot;
    rep.trials = cfg.trials;
    rep.seed = cfg.seed;
    // Independence is rejected at the 0.999 level when p < 0.001.
    rep.pass = chi2.p_value >= 0.001;
    rep.details_ = nlohmann::json{{"chi2", chi2.statistic},
                                  {"df", chi2.df},
                                  {"p_value", chi2.p_value},
                                  {"completed", completed},
                                  {"aborted", aborted},
                                  {"buckets", kBuckets},
                                  {"key_bits", cfg.ell},
                                  {"power_warning", completed < 20 * key_values * kBuckets}};
    return rep;
}

SecurityReport correctness_report(const protocol::EstimateConfig& config) {
    const auto stats_out = protocol::estimate_correctness(config);
    SecurityReport rep;
    rep.criterion = "correctness";
    rep.method = "monte_carlo";
    rep.value = stats_out.estimate;
    rep.interval = stats_out.wilson;
    rep.trials = stats_out.trials;
    rep.seed = config.master_seed;
    rep.details_ = nlohmann::json{{"aborts", stats_out.aborts},
                                  {"decode_failures", stats_out.decode_failures},
                                  {"key_mismatches", stats_out.key_mismatches},
                                  {"mean_rate_completed", stats_out.mean_rate_completed},
                                  {"mean_rate_all", stats_out.mean_rate_all}};
    return rep;
}

SecurityReport receiver_privacy_report(const ExactConfig& config) {
    const auto exact = exact_receiver_privacy(config);
    SecurityReport rep;
    rep.criterion = "receiver_privacy";
    rep.method = "enumeration";
    rep.value = exact.distance_double();
    rep.interval = {rep.value, rep.value};
    rep.exact = true;
    rep.trials = 0;
    rep.seed = 0;
    rep.pass = exact.is_zero();
    rep.details_ = nlohmann::json{{"atoms", exact.atoms}, {"distance_exact", exact.distance_string()}};
    return rep;
}

}  // namespace otforge::seclab

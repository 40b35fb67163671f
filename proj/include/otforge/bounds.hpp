#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "otforge/channel.hpp"

namespace otforge::bounds {

// Input distribution together with the induced joint P(x, y) = px(x) W(y|x).
struct JointDist {
    std::vector<double> px;
    std::vector<std::vector<double>> w;      // channel matrix
    std::vector<std::vector<double>> joint;  // px(x) * W(y|x)

    static JointDist from(std::vector<double> px, const channel::ChannelSpec& spec);
};

// I(X;Y) in bits.
double mutual_information(const JointDist& j);

// H(X|Y) in bits.
double conditional_entropy_x_given_y(const JointDist& j);

// T-round lower bound: sum_t { prod_{j<t} (1-2p_j)/2 } p_t (1 - H(q_t)), with
// (p_t, q_t) following the erasure-emulation recursion and the empty product
// equal to 1. p1 = 0 contributes a zero first term (the skipped pure-BSC round).
double lower_bound_theorem1(double p1, double q1, int rounds);

struct OptResult {
    double value = 0.0;
    std::vector<double> arg_px;
    std::vector<double> arg_pj_given_x;  // P(J=0|x) per input; empty for the min-free bound
};

// max_px min[ I(X;Y), H(X|Y) ] over the input simplex, by grid search plus
// derivative-free refinement with seeded restarts.
OptResult upper_bound_eq5(const channel::ChannelSpec& spec, std::uint64_t seed = 1);

// max_px min_{P(J|X), |J|=2} [ I(X;J|Y) + I(X;Y|J) ]. The inner minimization
// gets the restarts and the tolerance budget: any slack there only raises the
// reported value, which keeps it a valid upper bound, while the constant-J and
// J=X candidates pin it below min(I, H(X|Y)) pointwise.
OptResult upper_bound_eq4_j2(const channel::ChannelSpec& spec, std::uint64_t seed = 1);

// Objective re-evaluation helpers for optimizer sanity checks.
double eq5_objective(const channel::ChannelSpec& spec, const std::vector<double>& px);
double eq4_objective(const channel::ChannelSpec& spec, const std::vector<double>& px,
                     const std::vector<double>& pj_given_x);

struct BoundCurveRow {
    double q1 = 0.0;
    std::vector<double> lb;  // lb[t-1] = T-round bound
    double ub_eq4_j2 = 0.0;
    double ub_eq5 = 0.0;
};

struct BoundCurve {
    double p1 = 0.0;
    int t_max = 3;
    bool has_eq4 = false;
    bool has_eq5 = false;
    std::vector<BoundCurveRow> rows;

    // Columns: q1, lb_T1..lb_T{t_max}, then ub_eq4_J2 and ub_eq5 if present.
    void write_csv(std::ostream& os) const;
};

struct SweepConfig {
    double p1 = 0.1;
    double q_lo = 0.01;
    double q_hi = 0.99;
    double q_step = 0.01;
    int t_max = 3;
    bool eq4 = true;
    bool eq5 = true;
    int threads = 0;
    std::uint64_t seed = 1;
};

BoundCurve sweep(const SweepConfig& config);

}  // namespace otforge::bounds

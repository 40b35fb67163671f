#include "otforge/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "otforge/ir_pa.hpp"
#include "otforge/mathutil.hpp"
#include "otforge/parallel.hpp"
#include "otforge/rng.hpp"

namespace otforge::bounds {

namespace {

double entropy_of(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) h -= xlog2x(v);
    return h;
}

// Nelder-Mead on R^d (minimization). Plain reflect/expand/contract/shrink;
// the objectives here are cheap and low-dimensional.
std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    double step, int max_iter) {
    const std::size_t d = x0.size();
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> vals(d + 1);
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= d; ++i) vals[i] = f(pts[i]);

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(d + 1);
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order[0], worst = order[d], second = order[d - 1];
        if (std::fabs(vals[worst] - vals[best]) < 1e-12) break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(d);

        auto blend = [&](double alpha) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + alpha * (pts[worst][k] - centroid[k]);
            return p;
        };

        auto reflected = blend(-1.0);
        const double fr = f(reflected);
        if (fr < vals[order[0]]) {
            auto expanded = blend(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = std::move(expanded);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(reflected);
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = std::move(reflected);
            vals[worst] = fr;
        } else {
            auto contracted = blend(0.5);
            const double fc = f(contracted);
            if (fc < vals[worst]) {
                pts[worst] = std::move(contracted);
                vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < d; ++k)
                        pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (vals[i] < vals[best]) best = i;
    return {pts[best], vals[best]};
}

std::vector<double> project_simplex(std::vector<double> x) {
    double sum = 0.0;
    for (auto& v : x) {
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (sum <= 0.0) return std::vector<double>(x.size(), 1.0 / static_cast<double>(x.size()));
    for (auto& v : x) v /= sum;
    return x;
}

std::vector<double> clamp_unit_box(std::vector<double> x) {
    for (auto& v : x) v = std::min(1.0, std::max(0.0, v));
    return x;
}

// Simplex grid with k coordinates summing to `steps` units of 1/steps.
void simplex_grid(std::size_t k, int steps, std::vector<std::vector<double>>& out) {
    std::vector<int> units(k, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos + 1 == k) {
            units[pos] = left;
            std::vector<double> p(k);
            for (std::size_t i = 0; i < k; ++i) p[i] = static_cast<double>(units[i]) / steps;
            out.push_back(std::move(p));
            return;
        }
        for (int u = 0; u <= left; ++u) {
            units[pos] = u;
            rec(pos + 1, left - u);
        }
    };
    rec(0, steps);
}

struct InnerResult {
    double value = 0.0;
    std::vector<double> u;  // P(J=0|x)
};

}  // namespace

JointDist JointDist::from(std::vector<double> px, const channel::ChannelSpec& spec) {
    if (px.size() != spec.num_inputs())
        throw std::invalid_argument("JointDist: px size must match the input alphabet");
    double sum = 0.0;
    for (double v : px) {
        if (!(v >= 0.0)) throw std::invalid_argument("JointDist: px entries must be non-negative");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("JointDist: px must sum to 1");
    JointDist j;
    j.px = std::move(px);
    j.w = spec.matrix();
    j.joint.assign(j.px.size(), std::vector<double>(spec.num_outputs(), 0.0));
    for (std::size_t x = 0; x < j.px.size(); ++x)
        for (std::size_t y = 0; y < spec.num_outputs(); ++y) j.joint[x][y] = j.px[x] * j.w[x][y];
    return j;
}

double mutual_information(const JointDist& j) {
    // I = H(X) + H(Y) - H(X,Y); entropy sums keep the dyadic anchor cases exact.
    const std::size_t ny = j.joint.empty() ? 0 : j.joint[0].size();
    std::vector<double> py(ny, 0.0);
    double hxy = 0.0;
    for (const auto& row : j.joint)
        for (std::size_t y = 0; y < ny; ++y) {
            py[y] += row[y];
            hxy -= xlog2x(row[y]);
        }
    return entropy_of(j.px) + entropy_of(py) - hxy;
}

double conditional_entropy_x_given_y(const JointDist& j) {
    const std::size_t ny = j.joint.empty() ? 0 : j.joint[0].size();
    std::vector<double> py(ny, 0.0);
    double hxy = 0.0;
    for (const auto& row : j.joint)
        for (std::size_t y = 0; y < ny; ++y) {
            py[y] += row[y];
            hxy -= xlog2x(row[y]);
        }
    return hxy - entropy_of(py);
}

double lower_bound_theorem1(double p1, double q1, int rounds) {
    if (rounds < 1) throw std::invalid_argument("lower_bound_theorem1: rounds must be >= 1");
    if (!(p1 >= 0.0) || !(p1 <= 0.5))
        throw std::invalid_argument("lower_bound_theorem1: p1 must lie in [0, 0.5]");
    if (!(q1 > 0.0) || !(q1 < 1.0))
        throw std::invalid_argument("lower_bound_theorem1: q1 must lie in (0, 1)");
    double total = 0.0;
    double prefix = 1.0;
    double p = p1, q = q1;
    for (int t = 0; t < rounds; ++t) {
        const double term = prefix * (p * (1.0 - ir_pa::binary_entropy(q)));
        total += std::max(0.0, term);
        if (t + 1 < rounds) {
            prefix *= (1.0 - 2.0 * p) / 2.0;
            const auto next = channel::emulated_params(q);
            p = next.p_next;
            q = next.q_next;
        }
    }
    return total;
}

double eq5_objective(const channel::ChannelSpec& spec, const std::vector<double>& px) {
    const auto j = JointDist::from(px, spec);
    return std::min(mutual_information(j), conditional_entropy_x_given_y(j));
}

OptResult upper_bound_eq5(const channel::ChannelSpec& spec, std::uint64_t seed) {
    const std::size_t k = spec.num_inputs();
    Rng rng = Rng::derive(seed, 0, stream::kOptimizer);

    auto objective = [&](const std::vector<double>& raw) {
        return eq5_objective(spec, project_simplex(raw));
    };

    std::vector<std::vector<double>> starts;
    starts.emplace_back(k, 1.0 / static_cast<double>(k));
    std::vector<std::vector<double>> grid;
    simplex_grid(k, k <= 2 ? 100 : 20, grid);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < grid.size(); ++i) ranked.push_back({objective(grid[i]), i});
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i)
        starts.push_back(grid[ranked[i].second]);
    for (int r = 0; r < 20; ++r) {
        std::vector<double> p(k);
        for (auto& v : p) v = -std::log(std::max(rng.uniform01(), 1e-300));
        starts.push_back(project_simplex(std::move(p)));
    }

    OptResult best;
    best.value = -1.0;
    for (const auto& s : starts) {
        auto [x, negv] = nelder_mead([&](const std::vector<double>& p) { return -objective(p); }, s,
                                     0.05, 400);
        if (-negv > best.value) {
            best.value = -negv;
            best.arg_px = project_simplex(x);
        }
    }
    best.value = eq5_objective(spec, best.arg_px);
    return best;
}

double eq4_objective(const channel::ChannelSpec& spec, const std::vector<double>& px,
                     const std::vector<double>& u) {
    const std::size_t nx = spec.num_inputs();
    const std::size_t ny = spec.num_outputs();
    if (px.size() != nx || u.size() != nx)
        throw std::invalid_argument("eq4_objective: dimension mismatch");

    // Joint p(x, j, y) = px(x) P(j|x) W(y|x); objective
    //   I(X;J|Y) + I(X;Y|J) = H(X|Y) + H(X|J) - 2 H(X|JY).
    double h_xjy = 0.0, h_jy = 0.0, h_xj = 0.0, h_j = 0.0, h_xy = 0.0, h_y = 0.0;
    std::vector<double> pj(2, 0.0), py(ny, 0.0);
    std::vector<std::vector<double>> pjy(2, std::vector<double>(ny, 0.0));
    std::vector<double> pxj_row(2, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        const double wx = px[x];
        for (int jj = 0; jj < 2; ++jj) {
            const double pxj = wx * (jj == 0 ? u[x] : 1.0 - u[x]);
            h_xj -= xlog2x(pxj);
            pj[jj] += pxj;
            for (std::size_t y = 0; y < ny; ++y) {
                const double v = pxj * spec.prob(static_cast<channel::Symbol>(x),
                                                 static_cast<channel::Symbol>(y));
                h_xjy -= xlog2x(v);
                pjy[jj][y] += v;
            }
        }
        for (std::size_t y = 0; y < ny; ++y) {
            const double v = wx * spec.prob(static_cast<channel::Symbol>(x),
                                            static_cast<channel::Symbol>(y));
            h_xy -= xlog2x(v);
            py[y] += v;
        }
    }
    for (int jj = 0; jj < 2; ++jj) {
        h_j -= xlog2x(pj[jj]);
        for (std::size_t y = 0; y < ny; ++y) h_jy -= xlog2x(pjy[jj][y]);
    }
    for (std::size_t y = 0; y < ny; ++y) h_y -= xlog2x(py[y]);

    const double h_x_given_y = h_xy - h_y;
    const double h_x_given_j = h_xj - h_j;
    const double h_x_given_jy = h_xjy - h_jy;
    return h_x_given_y + h_x_given_j - 2.0 * h_x_given_jy;
}

namespace {

InnerResult eq4_inner_min(const channel::ChannelSpec& spec, const std::vector<double>& px, Rng& rng) {
    const std::size_t k = spec.num_inputs();
    auto objective = [&](const std::vector<double>& raw) {
        return eq4_objective(spec, px, clamp_unit_box(raw));
    };

    InnerResult best;
    best.value = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<double>& u) {
        const double v = objective(u);
        if (v < best.value) {
            best.value = v;
            best.u = clamp_unit_box(u);
        }
    };

    // Constant columns (J independent of X) and all deterministic binary maps
    // J = f(X); for |X| = 2 these include J = X, so the running minimum never
    // exceeds min(I(X;Y), H(X|Y)).
    for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) consider(std::vector<double>(k, c));
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        std::vector<double> u(k, 0.0);
        for (std::size_t x = 0; x < k; ++x) u[x] = (mask >> x) & 1 ? 1.0 : 0.0;
        consider(u);
    }

    // Coarse grid, finer for binary inputs.
    if (k == 2) {
        const int steps = 100;
        for (int a = 0; a <= steps; ++a)
            for (int b = 0; b <= steps; ++b)
                consider({static_cast<double>(a) / steps, static_cast<double>(b) / steps});
    } else {
        const int steps = 10;
        std::vector<double> u(k, 0.0);
        std::function<void(std::size_t)> rec = [&](std::size_t pos) {
            if (pos == k) {
                consider(u);
                return;
            }
            for (int a = 0; a <= steps; ++a) {
                u[pos] = static_cast<double>(a) / steps;
                rec(pos + 1);
            }
        };
        rec(0);
    }

    // Derivative-free refinement with restarts; the inner problem is the side
    // that must be solved well for validity.
    std::vector<std::vector<double>> starts;
    starts.push_back(best.u);
    for (int r = 0; r < 20; ++r) {
        std::vector<double> u(k);
        for (auto& v : u) v = rng.uniform01();
        starts.push_back(std::move(u));
    }
    for (const auto& s : starts) {
        auto [u, v] = nelder_mead(objective, s, 0.05, 300);
        if (v < best.value) {
            best.value = v;
            best.u = clamp_unit_box(u);
        }
    }
    best.value = eq4_objective(spec, px, best.u);
    return best;
}

}  // namespace

OptResult upper_bound_eq4_j2(const channel::ChannelSpec& spec, std::uint64_t seed) {
    const std::size_t k = spec.num_inputs();
    Rng rng = Rng::derive(seed, 1, stream::kOptimizer);

    auto outer = [&](const std::vector<double>& raw) {
        return eq4_inner_min(spec, project_simplex(raw), rng).value;
    };

    std::vector<std::vector<double>> grid;
    simplex_grid(k, k <= 2 ? 100 : 10, grid);
    OptResult best;
    best.value = -1.0;
    for (const auto& p : grid) {
        const double v = outer(p);
        if (v > best.value) {
            best.value = v;
            best.arg_px = p;
        }
    }
    auto [x, negv] = nelder_mead([&](const std::vector<double>& p) { return -outer(p); },
                                 best.arg_px, 0.02, 60);
    if (-negv > best.value) {
        best.value = -negv;
        best.arg_px = project_simplex(x);
    }
    const auto inner = eq4_inner_min(spec, best.arg_px, rng);
    best.value = inner.value;
    best.arg_pj_given_x = inner.u;
    return best;
}

void BoundCurve::write_csv(std::ostream& os) const {
    os << "q1";
    for (int t = 1; t <= t_max; ++t) os << ",lb_T" << t;
    if (has_eq4) os << ",ub_eq4_J2";
    if (has_eq5) os << ",ub_eq5";
    os << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        os << ',' << buf;
    };
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.12g", row.q1);
        os << buf;
        for (double v : row.lb) put(v);
        if (has_eq4) put(row.ub_eq4_j2);
        if (has_eq5) put(row.ub_eq5);
        os << "\n";
    }
}

BoundCurve sweep(const SweepConfig& config) {
    if (!(config.q_step > 0.0)) throw std::invalid_argument("sweep: q_step must be positive");
    if (config.t_max < 1) throw std::invalid_argument("sweep: t_max must be >= 1");
    std::vector<double> grid;
    const auto count = floor_tol((config.q_hi - config.q_lo) / config.q_step) + 1;
    for (std::int64_t i = 0; i < count; ++i) {
        const double q = config.q_lo + static_cast<double>(i) * config.q_step;
        if (q > 0.0 && q < 1.0) grid.push_back(q);
    }

    BoundCurve curve;
    curve.p1 = config.p1;
    curve.t_max = config.t_max;
    curve.has_eq4 = config.eq4;
    curve.has_eq5 = config.eq5;
    curve.rows = par::map_indexed<BoundCurveRow>(
        grid.size(),
        [&](std::size_t i) {
            BoundCurveRow row;
            row.q1 = grid[i];
            for (int t = 1; t <= config.t_max; ++t)
                row.lb.push_back(lower_bound_theorem1(config.p1, row.q1, t));
            const auto spec = channel::make_bsec(channel::BsecParams(config.p1, row.q1));
            if (config.eq4) row.ub_eq4_j2 = upper_bound_eq4_j2(spec, config.seed + i).value;
            if (config.eq5) row.ub_eq5 = upper_bound_eq5(spec, config.seed + i).value;
            return row;
        },
        config.threads);
    return curve;
}

}  // namespace otforge::bounds

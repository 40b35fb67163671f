#include "otforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace otforge::stats {

Interval wilson(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = phat + z2 / (2.0 * n);
    const double margin = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    // The interval always contains the point estimate; rounding dust at the
    // extremes (0 or n successes) must not push a bound past it.
    const double lo = std::min(phat, std::max(0.0, (center - margin) / denom));
    const double hi = std::max(phat, std::min(1.0, (center + margin) / denom));
    return {lo, hi};
}

namespace {

// Lower regularized incomplete gamma by series expansion.
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by Lentz continued fraction.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(df / 2.0, x / 2.0);
}

Chi2Result chi2_independence(const std::vector<std::vector<std::uint64_t>>& table) {
    const std::size_t r = table.size();
    if (r == 0) return {};
    const std::size_t c = table[0].size();
    std::vector<double> row(r, 0.0), col(c, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            row[i] += static_cast<double>(table[i][j]);
            col[j] += static_cast<double>(table[i][j]);
            total += static_cast<double>(table[i][j]);
        }
    if (total == 0.0) return {};
    Chi2Result res;
    std::size_t nonzero_rows = 0, nonzero_cols = 0;
    for (auto v : row) nonzero_rows += v > 0 ? 1 : 0;
    for (auto v : col) nonzero_cols += v > 0 ? 1 : 0;
    for (std::size_t i = 0; i < r; ++i) {
        if (row[i] == 0.0) continue;
        for (std::size_t j = 0; j < c; ++j) {
            if (col[j] == 0.0) continue;
            const double expect = row[i] * col[j] / total;
            const double diff = static_cast<double>(table[i][j]) - expect;
            res.statistic += diff * diff / expect;
        }
    }
    res.df = static_cast<double>((nonzero_rows > 1 ? nonzero_rows - 1 : 0) *
                                 (nonzero_cols > 1 ? nonzero_cols - 1 : 0));
    res.p_value = res.df > 0 ? chi2_sf(res.statistic, res.df) : 1.0;
    return res;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace otforge::stats

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace otforge::stats {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for a binomial proportion (default 95%).
Interval wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Survival function of the chi-squared distribution.
double chi2_sf(double x, double df);

// Pearson chi-squared independence statistic for a contingency table.
struct Chi2Result {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};
Chi2Result chi2_independence(const std::vector<std::vector<std::uint64_t>>& table);

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

}  // namespace otforge::stats

#pragma once

#include <cmath>
#include <cstdint>

namespace otforge {

// Ceiling/floor with an ulp guard. Parameter schedules evaluate products like
// n*(p - delta) that are exact integers in real arithmetic; the guard keeps
// double rounding from shifting them across the integer boundary.
inline std::int64_t ceil_tol(double x, double tol = 1e-6) {
    return static_cast<std::int64_t>(std::ceil(x - tol));
}

inline std::int64_t floor_tol(double x, double tol = 1e-6) {
    return static_cast<std::int64_t>(std::floor(x + tol));
}

inline double xlog2x(double v) { return v > 0.0 ? v * std::log2(v) : 0.0; }

}  // namespace otforge

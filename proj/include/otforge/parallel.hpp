#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#include <omp.h>

namespace otforge::par {

// Thread count resolution: explicit request, else OTFORGE_THREADS, else the
// OpenMP default.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("OTFORGE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return omp_get_max_threads();
}

// Serial reference kernel, kept as the ground truth the OpenMP path must match.
template <class T, class Fn>
void map_indexed_serial(std::vector<T>& out, Fn&& fn) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(i);
}

// OpenMP kernel. Every element is produced independently and stored by index,
// so the result is identical to the serial path for any thread count.
template <class T, class Fn>
void map_indexed_omp(std::vector<T>& out, Fn&& fn, int threads) {
    const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
}

template <class T, class Fn>
std::vector<T> map_indexed(std::size_t n, Fn&& fn, int threads = 0) {
    std::vector<T> out(n);
    const int t = resolve_threads(threads);
    if (t <= 1 || n <= 1)
        map_indexed_serial(out, fn);
    else
        map_indexed_omp(out, fn, t);
    return out;
}

}  // namespace otforge::par

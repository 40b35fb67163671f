// Serial vs OpenMP benchmark for the three kernels that dominate wall time:
// protocol trial ensembles, bound sweeps, and Toeplitz hashing. The parallel
// kernels must produce bit-identical results to the serial reference; this
// binary reports the speedup that buys.

#include <chrono>
#include <cstdio>
#include <vector>

#include "otforge/bounds.hpp"
#include "otforge/hashing.hpp"
#include "otforge/parallel.hpp"
#include "otforge/protocol.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class Fn>
double timed(Fn&& fn) {
    const auto start = Clock::now();
    fn();
    return seconds_since(start);
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3fs   omp %8.3fs   speedup %5.2fx\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

double run_trials(int threads) {
    otforge::protocol::EstimateConfig cfg;
    cfg.variant = otforge::protocol::Variant::P1;
    cfg.params = {2000, 1, 0.1, 0.25, 0.01};
    cfg.trials = 400;
    cfg.master_seed = 42;
    cfg.threads = threads;
    return otforge::protocol::estimate_correctness(cfg).estimate;
}

void run_bounds(int threads) {
    otforge::bounds::SweepConfig cfg;
    cfg.p1 = 0.1;
    cfg.q_lo = 0.05;
    cfg.q_hi = 0.95;
    cfg.q_step = 0.05;
    cfg.t_max = 3;
    cfg.eq4 = true;
    cfg.eq5 = true;
    cfg.threads = threads;
    (void)otforge::bounds::sweep(cfg);
}

void run_hashing(int threads) {
    otforge::Rng rng(7);
    const auto seed = otforge::hashing::sample_seed(4096, 2048, rng);
    std::vector<otforge::BitString> inputs;
    for (int i = 0; i < 2000; ++i) inputs.push_back(rng.bits(4096));
    auto hashes = otforge::par::map_indexed<otforge::BitString>(
        inputs.size(), [&](std::size_t i) { return otforge::hashing::hash(seed, inputs[i]); },
        threads);
    (void)hashes;
}

}  // namespace

int main() {
    const int threads = otforge::par::resolve_threads(0);
    std::printf("otforge benchmark, %d threads vs serial reference\n\n", threads);

    double r1 = 0, r2 = 0;
    const double t1s = timed([&] { r1 = run_trials(1); });
    const double t1p = timed([&] { r2 = run_trials(threads); });
    report("protocol trial ensemble", t1s, t1p);
    if (r1 != r2) {
        std::printf("ERROR: serial and parallel trial results differ\n");
        return 1;
    }

    const double t2s = timed([&] { run_bounds(1); });
    const double t2p = timed([&] { run_bounds(threads); });
    report("bound sweep (19 points)", t2s, t2p);

    const double t3s = timed([&] { run_hashing(1); });
    const double t3p = timed([&] { run_hashing(threads); });
    report("toeplitz hashing batch", t3s, t3p);
    return 0;
}

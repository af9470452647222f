// OpenMP-backed kernels with a serial reference path.
//
// Results are identical bit-for-bit between the two paths and independent of
// the thread count: maps are embarrassingly parallel, and reductions sum
// fixed-size blocks whose partials are combined in index order.  Tests assert
// exact equality; bench/bench_kernels.cpp compares throughput.
#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfb::par {

// Global switch, settable at runtime (used by tests and the benchmark).
inline bool& serial_mode() {
    static bool mode = false;
    return mode;
}

inline bool parallel_enabled() {
#ifdef _OPENMP
    return !serial_mode();
#else
    return false;
#endif
}

// Elementwise map over [0, count).
template <class Fn>
void for_each(std::ptrdiff_t count, Fn&& fn) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    }
}

inline constexpr std::ptrdiff_t kReduceBlock = 4096;

// Deterministic sum of fn(i) over [0, count): fixed 4096-wide blocks are
// summed serially, block partials are combined in block order.
template <class Fn>
double block_sum(std::ptrdiff_t count, Fn&& fn) {
    if (count <= 0) return 0.0;
    const std::ptrdiff_t nblocks = (count + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(static_cast<size_t>(nblocks));
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
            const std::ptrdiff_t lo = b * kReduceBlock;
            const std::ptrdiff_t hi = lo + kReduceBlock < count ? lo + kReduceBlock : count;
            double s = 0.0;
            for (std::ptrdiff_t i = lo; i < hi; ++i) s += fn(i);
            partial[static_cast<size_t>(b)] = s;
        }
    } else {
        for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
            const std::ptrdiff_t lo = b * kReduceBlock;
            const std::ptrdiff_t hi = lo + kReduceBlock < count ? lo + kReduceBlock : count;
            double s = 0.0;
            for (std::ptrdiff_t i = lo; i < hi; ++i) s += fn(i);
            partial[static_cast<size_t>(b)] = s;
        }
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

// Deterministic max of fn(i); ties resolved toward the smaller index.
template <class Fn>
std::ptrdiff_t argmax(std::ptrdiff_t count, Fn&& fn) {
    const std::ptrdiff_t nblocks = (count + kReduceBlock - 1) / kReduceBlock;
    std::vector<std::ptrdiff_t> arg(static_cast<size_t>(nblocks));
    std::vector<double> val(static_cast<size_t>(nblocks));
    for_each(nblocks, [&](std::ptrdiff_t b) {
        const std::ptrdiff_t lo = b * kReduceBlock;
        const std::ptrdiff_t hi = lo + kReduceBlock < count ? lo + kReduceBlock : count;
        std::ptrdiff_t a = lo;
        double best = fn(lo);
        for (std::ptrdiff_t i = lo + 1; i < hi; ++i) {
            const double v = fn(i);
            if (v > best) { best = v; a = i; }
        }
        arg[static_cast<size_t>(b)] = a;
        val[static_cast<size_t>(b)] = best;
    });
    std::ptrdiff_t a = arg[0];
    double best = val[0];
    for (std::ptrdiff_t b = 1; b < nblocks; ++b) {
        if (val[static_cast<size_t>(b)] > best) {
            best = val[static_cast<size_t>(b)];
            a = arg[static_cast<size_t>(b)];
        }
    }
    return a;
}

} // namespace mfb::par

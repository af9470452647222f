// Throughput comparison of the OpenMP kernels against the serial reference.
// The two paths are bit-identical by construction (fixed-block reductions);
// this target reports the speedups.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mfb/grid.hpp"
#include "mfb/greens.hpp"
#include "mfb/par.hpp"
#include "mfb/spectral.hpp"

using namespace mfb;
using Clock = std::chrono::steady_clock;

namespace {

template <class Fn>
double time_ms(Fn&& fn, int reps) {
    fn(); // warm up
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

struct Row {
    const char* name;
    double serial_ms;
    double parallel_ms;
};

void print(const Row& r) {
    std::printf("%-28s %10.2f ms %10.2f ms   x%.2f\n", r.name, r.serial_ms, r.parallel_ms,
                r.serial_ms / r.parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 1024;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    const Grid g = make_grid(n);
    std::printf("grid %d x %d, %d reps per measurement\n\n", n, n, reps);
    std::printf("%-28s %13s %13s\n", "kernel", "serial", "openmp");

    PeriodicField a = sample(g, [](Vec2 x) {
        return std::sin(2 * M_PI * x.x) + 0.3 * std::cos(4 * M_PI * x.y);
    });
    PeriodicField b = sample(g, [](Vec2 x) { return std::cos(2 * M_PI * (x.x + x.y)); });

    auto bench_both = [&](const char* name, auto&& fn) {
        par::serial_mode() = true;
        const double s = time_ms(fn, reps);
        par::serial_mode() = false;
        const double p = time_ms(fn, reps);
        print({name, s, p});
    };

    // pointwise density-style map: exp + multiply
    PeriodicField dens(g);
    bench_both("density map (exp)", [&] {
        par::for_each(g.size(), [&](std::ptrdiff_t k) { dens[k] = b[k] * std::exp(a[k]); });
    });

    // deterministic blockwise reduction
    volatile double sink = 0.0;
    bench_both("block_sum reduction", [&] {
        sink = par::block_sum(g.size(), [&](std::ptrdiff_t k) { return a[k] * b[k]; });
    });
    (void)sink;

    // field sampling of a closed form (torus distances + logs)
    bench_both("field sample (dist/log)", [&] {
        PeriodicField f = sample(g, [](Vec2 x) {
            const double d = torus_dist(x, {0.31, 0.17});
            return d > 0 ? d * d * std::log(d + 1e-30) : 0.0;
        });
        (void)f;
    });

    // spectral Laplacian: FFT (serial FFTW) + parallel multiplier map
    bench_both("laplacian (FFT+map)", [&] {
        PeriodicField l = laplacian(a);
        (void)l;
    });

    // Green's function grid field: FFT + local short-range stencil
    Greens greens(g);
    int which = 0;
    bench_both("green field assembly", [&] {
        // alternate sources so the cache never hits
        const double off = 0.001 * (which++ % 7);
        PeriodicField gf = greens.green({0.25 + off, 0.375});
        (void)gf;
    });

    return 0;
}

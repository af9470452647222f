#include "mfb/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace mfb {
namespace {

// One set of plans + aligned buffers per grid size.  FFTW planning is not
// thread safe; execution on the cached buffers is serialized by the mutex.
struct PlanSet {
    int n = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan fwd{};
    fftw_plan bwd{};

    explicit PlanSet(int n_) : n(n_) {
        real = fftw_alloc_real(static_cast<size_t>(n) * n);
        cplx = fftw_alloc_complex(static_cast<size_t>(n) * (n / 2 + 1));
        fwd = fftw_plan_dft_r2c_2d(n, n, real, cplx, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(n, n, cplx, real, FFTW_ESTIMATE);
    }
    ~PlanSet() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(cplx);
    }
    PlanSet(const PlanSet&) = delete;
    PlanSet& operator=(const PlanSet&) = delete;
};

std::mutex g_mutex;
std::map<int, PlanSet*>& plan_cache() {
    static std::map<int, PlanSet*> cache;
    return cache;
}

PlanSet& plans_for(int n) {
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, new PlanSet(n)).first;
    return *it->second;
}

} // namespace

HalfSpectrum fft_forward(const PeriodicField& f) {
    const int n = f.n();
    HalfSpectrum s;
    s.n = n;
    s.c.resize(static_cast<size_t>(n) * (n / 2 + 1));
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanSet& p = plans_for(n);
    std::memcpy(p.real, f.v.data(), sizeof(double) * f.v.size());
    fftw_execute(p.fwd);
    std::memcpy(s.c.data(), p.cplx, sizeof(fftw_complex) * s.c.size());
    return s;
}

PeriodicField fft_inverse(const HalfSpectrum& s, Grid g) {
    const int n = g.n;
    PeriodicField f(g);
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanSet& p = plans_for(n);
    std::memcpy(p.cplx, s.c.data(), sizeof(fftw_complex) * s.c.size());
    fftw_execute(p.bwd);
    const double inv = 1.0 / (double(n) * n);
    for (std::ptrdiff_t k = 0; k < f.size(); ++k) f[k] = p.real[k] * inv;
    return f;
}

} // namespace mfb

#include "mfb/spectral.hpp"

#include <cmath>
#include <map>

#include "mfb/errors.hpp"
#include "mfb/par.hpp"

namespace mfb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double integrate(const PeriodicField& f) {
    return par::block_sum(f.size(), [&](std::ptrdiff_t k) { return f[k]; }) / double(f.size());
}

double inner(const PeriodicField& f, const PeriodicField& g) {
    return par::block_sum(f.size(), [&](std::ptrdiff_t k) { return f[k] * g[k]; }) / double(f.size());
}

double lp_norm(const PeriodicField& f, double p) {
    const double s =
        par::block_sum(f.size(), [&](std::ptrdiff_t k) { return std::pow(std::abs(f[k]), p); });
    return std::pow(s / double(f.size()), 1.0 / p);
}

PeriodicField laplacian(const PeriodicField& f) {
    const int n = f.n();
    HalfSpectrum s = fft_forward(f);
    const int ncol = n / 2 + 1;
    par::for_each(std::ptrdiff_t(n) * ncol, [&](std::ptrdiff_t idx) {
        const int i = int(idx / ncol), j = int(idx % ncol);
        const double k1 = wave_number(i, n);
        const double k2 = j;
        s.c[static_cast<size_t>(idx)] *= -kTwoPi * kTwoPi * (k1 * k1 + k2 * k2);
    });
    return fft_inverse(s, f.grid);
}

PeriodicField solve_poisson_meanzero(const PeriodicField& rhs, double mean_tol) {
    const double m = integrate(rhs);
    if (std::abs(m) >= mean_tol)
        throw NonZeroMeanError("solve_poisson_meanzero: rhs mean " + std::to_string(m));
    const int n = rhs.n();
    HalfSpectrum s = fft_forward(rhs);
    const int ncol = n / 2 + 1;
    par::for_each(std::ptrdiff_t(n) * ncol, [&](std::ptrdiff_t idx) {
        const int i = int(idx / ncol), j = int(idx % ncol);
        const double k1 = wave_number(i, n);
        const double k2 = j;
        const double k2norm = k1 * k1 + k2 * k2;
        if (k2norm == 0.0)
            s.c[static_cast<size_t>(idx)] = 0.0;
        else
            s.c[static_cast<size_t>(idx)] /= kTwoPi * kTwoPi * k2norm;
    });
    return fft_inverse(s, rhs.grid);
}

double project_mean_zero(PeriodicField& f) {
    const double m = integrate(f);
    shift(f, -m);
    return m;
}

namespace {

using CLD = std::complex<long double>;

// iterative radix-2 Cooley-Tukey over a precomputed root table; n a power
// of two.  Table lookup keeps every twiddle at full long-double accuracy
// (a multiplicative recurrence loses ~100x against the double FFTW path).
const std::vector<CLD>& root_table(int n) {
    static std::map<int, std::vector<CLD>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        constexpr long double kTwoPiL = 6.283185307179586476925286766559L;
        std::vector<CLD> tab(static_cast<size_t>(n / 2));
        for (int j = 0; j < n / 2; ++j)
            tab[size_t(j)] = CLD(std::cos(kTwoPiL * j / n), -std::sin(kTwoPiL * j / n));
        it = cache.emplace(n, std::move(tab)).first;
    }
    return it->second;
}

void fft1d_ld(CLD* a, int n, bool inverse) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const std::vector<CLD>& tab = root_table(n);
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                CLD w = tab[size_t(k) * size_t(stride)];
                if (inverse) w = std::conj(w);
                const CLD u = a[i + k];
                const CLD v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

PeriodicField laplacian_precise(const PeriodicField& f) {
    const int n = f.n();
    if (!is_pow2(n)) return laplacian(f);
    std::vector<CLD> a(static_cast<size_t>(n) * n);
    for (std::ptrdiff_t k = 0; k < f.size(); ++k) a[size_t(k)] = CLD(f[k], 0.0L);

    std::vector<CLD> col(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) fft1d_ld(a.data() + size_t(i) * n, n, false);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[size_t(i)] = a[size_t(i) * n + j];
        fft1d_ld(col.data(), n, false);
        for (int i = 0; i < n; ++i) a[size_t(i) * n + j] = col[size_t(i)];
    }
    constexpr long double kTwoPiL = 6.283185307179586476925286766559L;
    for (int i = 0; i < n; ++i) {
        const long double k1 = wave_number(i, n);
        for (int j = 0; j < n; ++j) {
            const long double k2 = wave_number(j, n);
            a[size_t(i) * n + j] *= -kTwoPiL * kTwoPiL * (k1 * k1 + k2 * k2);
        }
    }
    for (int i = 0; i < n; ++i) fft1d_ld(a.data() + size_t(i) * n, n, true);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[size_t(i)] = a[size_t(i) * n + j];
        fft1d_ld(col.data(), n, true);
        for (int i = 0; i < n; ++i) a[size_t(i) * n + j] = col[size_t(i)];
    }
    PeriodicField out(f.grid);
    const long double inv = 1.0L / (static_cast<long double>(n) * n);
    for (std::ptrdiff_t k = 0; k < out.size(); ++k)
        out[k] = double(a[size_t(k)].real() * inv);
    return out;
}

Interpolator::Interpolator(const PeriodicField& f) : spec_(fft_forward(f)) {}

// Real trig interpolant: per-axis basis b_i(x) = e^{2 pi i k x} with
// k = wave_number(i), except the Nyquist index which contributes cos(pi n x).
// Conjugate symmetry folds the missing spectrum half into 2*Re(...).
double Interpolator::operator()(Vec2 x) const {
    const int n = spec_.n;
    const int ncol = n / 2 + 1;
    std::vector<std::complex<double>> bx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (i == n / 2) {
            bx[static_cast<size_t>(i)] = std::cos(kTwoPi * (n / 2) * x.x);
        } else {
            const double ph = kTwoPi * wave_number(i, n) * x.x;
            bx[static_cast<size_t>(i)] = {std::cos(ph), std::sin(ph)};
        }
    }
    double acc = 0.0;
    for (int j = 0; j < ncol; ++j) {
        std::complex<double> inner_sum = 0.0;
        for (int i = 0; i < n; ++i)
            inner_sum += spec_.c[static_cast<size_t>(i) * ncol + j] * bx[static_cast<size_t>(i)];
        if (j == 0) {
            acc += inner_sum.real();
        } else if (j == n / 2) {
            acc += inner_sum.real() * std::cos(kTwoPi * (n / 2) * x.y);
        } else {
            const double ph = kTwoPi * j * x.y;
            acc += 2.0 * (inner_sum.real() * std::cos(ph) - inner_sum.imag() * std::sin(ph));
        }
    }
    return acc / (double(n) * n);
}

double interpolate(const PeriodicField& f, Vec2 x) { return Interpolator(f)(x); }

} // namespace mfb

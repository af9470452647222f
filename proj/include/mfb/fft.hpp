// Thin FFTW wrapper: real-to-complex 2D transforms with cached plans.
// Plans are created with FFTW_ESTIMATE (deterministic) against internal
// aligned buffers; callers pass plain std::vector-backed fields.
#pragma once

#include <complex>
#include <vector>

#include "mfb/grid.hpp"

namespace mfb {

// Half-spectrum of a real n x n field: (n) x (n/2+1) complex values,
// row index = k1 in FFTW order (0..n-1 meaning 0..n/2,-n/2+1..-1),
// column index = k2 in 0..n/2.
struct HalfSpectrum {
    int n = 0;
    std::vector<std::complex<double>> c;

    std::complex<double>& at(int i, int j) { return c[static_cast<size_t>(i) * (n / 2 + 1) + j]; }
    std::complex<double> at(int i, int j) const { return c[static_cast<size_t>(i) * (n / 2 + 1) + j]; }
};

// Signed wave number for FFTW row index i on an n-grid: 0..n/2, then negative.
inline int wave_number(int i, int n) { return (i <= n / 2) ? i : i - n; }

HalfSpectrum fft_forward(const PeriodicField& f);

// Inverse of fft_forward including the 1/n^2 normalization.
PeriodicField fft_inverse(const HalfSpectrum& s, Grid g);

} // namespace mfb

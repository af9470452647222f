// Spectral calculus on the unit torus: Laplacian, mean-zero Poisson solve,
// quadrature (volume 1, so the integral is the sample mean), and
// trigonometric interpolation at arbitrary points.
#pragma once

#include "mfb/fft.hpp"
#include "mfb/grid.hpp"

namespace mfb {

// Sample mean == integral over the volume-1 torus; spectrally accurate for
// smooth integrands.  Deterministic blockwise reduction.
double integrate(const PeriodicField& f);

// L2 inner product \int f g.
double inner(const PeriodicField& f, const PeriodicField& g);

double lp_norm(const PeriodicField& f, double p);

PeriodicField laplacian(const PeriodicField& f);

// Laplacian evaluated through a long-double transform.  The double-precision
// spectral roundtrip floors at ~7e-13 * ||Delta f||_inf; residual
// verification of converged solutions needs the extra digits.  Requires a
// power-of-two grid (all production grids are); falls back to laplacian()
// otherwise.
PeriodicField laplacian_precise(const PeriodicField& f);

// Solve -Delta u = rhs with \int u = 0.  Requires |mean(rhs)| < mean_tol.
PeriodicField solve_poisson_meanzero(const PeriodicField& rhs, double mean_tol = 1e-10);

// Subtract the sample mean in place; returns the removed mean.
double project_mean_zero(PeriodicField& f);

// Trigonometric interpolation of a real field; exact at grid nodes.
// Caches the spectrum so repeated evaluations cost O(n^2) each without
// re-transforming.
class Interpolator {
public:
    explicit Interpolator(const PeriodicField& f);
    double operator()(Vec2 x) const;
    int n() const { return spec_.n; }

private:
    HalfSpectrum spec_;
};

double interpolate(const PeriodicField& f, Vec2 x);

} // namespace mfb

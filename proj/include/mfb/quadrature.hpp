// Adaptive 1D quadrature: Gauss-Kronrod 15(7) with interval bisection.
#pragma once

#include <cmath>
#include <functional>

namespace mfb {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // accumulated error estimate
    int evaluations = 0;
};

// Integrate fn over [a, b] to the requested absolute tolerance.
QuadResult integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                              double abs_tol = 1e-12, int max_depth = 32);

} // namespace mfb

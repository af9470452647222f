// Entire-plane Liouville structure: the classified radial solutions, the
// three bounded kernels of the linearized operator, the two test functions
// used for kernel-mass identities, and high-precision radial quadrature
// oracles for their integrals.
#pragma once

#include <string>

#include "mfb/grid.hpp"
#include "mfb/quadrature.hpp"

namespace mfb {

struct EntireBubble {
    double mu = 0.0;
    Vec2 a{0.0, 0.0};
};

// v_{mu,a}(z) = ln( 8 e^mu / (1 + e^mu |z+a|^2)^2 ); solves Dv + e^v = 0.
double bubble_value(const EntireBubble& b, Vec2 z);

// Y_0 = (1-|z|^2)/(1+|z|^2), Y_i = z_i/(1+|z|^2) for i=1,2.
double kernel_value(int i, Vec2 z);

// Closed-form derivatives of the translation kernels (i = 1,2).
Vec2 kernel_gradient(int i, Vec2 z);
double kernel_laplacian(int i, Vec2 z);

// eta_1 = -Y_0 - 1 = -2/(1+|z|^2).
double test_eta1(Vec2 z);

// eta_2 = (4/3) ln(1+|z|^2) Y_0 + 8/(3(1+|z|^2)).
double test_eta2(Vec2 z);

Vec2 eta2_gradient(Vec2 z);

// Weight rho(z) = (1+|z|)^{-1-alpha/2}.
double weight_rho(Vec2 z, double alpha);

struct RadialIntegral {
    double value = 0.0;      // quadrature over [0, r_max]
    double quad_error = 0.0; // accumulated quadrature error estimate
    double tail_bound = 0.0; // analytic bound on the dropped [r_max, inf) tail
};

// Named radial integrands (full 2D integrals reduced over the angle):
//   bubble_mass                int 8/(1+r^2)^2              -> 8 pi
//   kernel_y0_mass             int Y_0/(1+r^2)^2            -> 0
//   kernel_translation_energy  int |grad Y_1|^2 + 8 Y_1^2/(1+|z|^2)^2
//   weight_sq                  int rho(z)^2, alpha = 1/4
// Unknown names are rejected.
RadialIntegral radial_integral(const std::string& name, double r_max);

} // namespace mfb

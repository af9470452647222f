// Weight assembly and the reduced mean field equation
//   Delta w + (rho - 8 pi) ( h e^w / int h e^w - 1 ) = 0,  int w = 0,
// solved by spectrally preconditioned Newton on the mean-zero subspace,
// plus a numerical non-degeneracy margin for the linearization.
#pragma once

#include <vector>

#include "mfb/greens.hpp"
#include "mfb/grid.hpp"

namespace mfb {

struct Vortex {
    Vec2 q;
    int alpha = 1; // positive integer strength
};

struct WeightSpec {
    enum class Kind { Constant, ExpCos };
    Kind kind = Kind::Constant;
    double c0 = 1.0; // Constant: value
    double c1 = 0.0; // ExpCos: exp(c1 cos 2 pi x1 + c2 cos 2 pi x2)
    double c2 = 0.0;
    std::vector<Vortex> vortices; // extra singular sources, none at the origin

    double hstar_at(Vec2 x) const;
};

// h = h_* prod_i d(x,q_i)^{2 a_i} e^{-4 pi a_i R(x,q_i)}; zero exactly at the
// vortices, positive elsewhere.  Pointwise closed form (no interpolation).
double weight_h_at(const WeightSpec& spec, const Greens& greens, Vec2 x);
PeriodicField assemble_h(const WeightSpec& spec, const Greens& greens);

struct NewtonOptions {
    double tol = 1e-11; // max-norm of the residual
    int max_iter = 50;
    double lin_rel_tol = 1e-13;
    int lin_max_iter = 400;
};

struct BaseState {
    PeriodicField w; // mean zero
    double rho = 0.0;
    double residual = 0.0; // final Newton residual, max-norm
    double margin = 0.0;   // non-degeneracy margin (smallest |eigenvalue|)
    int newton_iters = 0;
    std::vector<double> residual_history;
    double int_h_ew = 0.0; // int h e^w, cached for the ansatz constants
};

// rho in units where the spec default is 12 pi; rejects rho in 8 pi N.
BaseState solve_base(double rho, const PeriodicField& h, const PeriodicField& w0,
                     const NewtonOptions& opt = {}, bool compute_margin = true);

// Smallest |eigenvalue| of the symmetrized linearized operator
//   phi -> Delta phi + (rho-8pi) k (phi - int k phi),  k = h e^w / int h e^w,
// on mean-zero fields, by inverse power iteration with the spectral Poisson
// preconditioner.
double nondegeneracy_margin(const PeriodicField& w, const PeriodicField& h, double rho);

// The linearized operator above; exposed for the Jacobian-consistency tests.
PeriodicField apply_base_jacobian(const PeriodicField& phi, const PeriodicField& w,
                                  const PeriodicField& h, double rho);

} // namespace mfb

// The approximate solution U_{t,q}: derived constants (lambda, C, Lambda,
// Gamma, theta, B), the local weight profile H_{t,q}, the two-piece C^1
// assembly, and its mass split.
#pragma once

#include "mfb/base_state.hpp"
#include "mfb/greens.hpp"
#include "mfb/grid.hpp"
#include "mfb/spectral.hpp"

namespace mfb {

// Bundles the per-run objects every stage downstream of the base solve needs.
struct ProblemCtx {
    const Greens& greens;
    const WeightSpec& wspec;
    const PeriodicField& h;
    const BaseState& base;
    const CollapseFields& pair;
    const Interpolator& w_interp;
    double rho;
    double R0;
    double r0;

    double t() const { return pair.pair().t; }
    Vec2 tq(Vec2 q) const { return {t() * q.x, t() * q.y}; }
    double w_at(Vec2 x) const { return w_interp(x); }
    double h_at(Vec2 x) const { return weight_h_at(wspec, greens, x); }
    // ln( rho/(rho-8pi) * int h e^w )
    double log_mass_const() const;
};

// H_{t,q}(y) = h(ty) |y-e|^2 |y+e|^2
//              e^{ -R_t2(ty) + 8pi R(ty,tq) - 8pi R(tq,tq) + w(ty) - w(tq) },
// with |y -+ e| realized as d(ty, +-te)/t so the factorization matches the
// singular weight under torus wrap.  Continuum pointwise evaluation.
double H_value(const ProblemCtx& ctx, Vec2 q, Vec2 y);
Vec2 H_gradient(const ProblemCtx& ctx, Vec2 q, Vec2 y);

struct BubbleParams {
    double t = 0.0;
    Vec2 q{0.0, 0.0};
    double lambda = 0.0;
    double C = 0.0;
    double Lambda = 0.0;
    double Gamma = 0.0;
    double theta = 0.0;
    double Bconst = 0.0;
    double R0 = 0.0;
    double H_q = 0.0;       // H_{t,q}(q)
    double w_tq = 0.0;      // w(tq)
    double R_qq = 0.0;      // R(tq,tq) (Robin constant)
    double mass_log = 0.0;  // ln( rho/(rho-8pi) int h e^w )
};

BubbleParams derive_params(const ProblemCtx& ctx, Vec2 q);

struct Ansatz {
    BubbleParams params;
    PeriodicField ustar;
    PeriodicField U; // ustar minus its sample mean
    double mean_ustar = 0.0;
    double interface_jump_c0 = 0.0; // sampled value jump on |x-tq| = t R0
    double interface_jump_c1 = 0.0; // radial-derivative jump
};

// Pointwise two-piece formula (closed form; w interpolated).
double ustar_at(const ProblemCtx& ctx, const BubbleParams& bp, Vec2 x);

// Samples the exact branch formulas on the grid (no interpolation smearing),
// subtracts the mean, and measures the interface jumps.
// Throws UnderResolvedError unless Lambda^{-1} >= 8/n.
Ansatz assemble_ansatz(const ProblemCtx& ctx, const BubbleParams& bp);

struct MassSplit {
    double inner_mass = 0.0;        // rho * mass fraction of B_{tR0}(tq)
    double outer_density_err = 0.0; // sup over M \ B_{2tR0}
    double Aconst = 0.0;            // measured total-mass deviation
    double total_mass = 0.0;        // int h e^{ustar - G_t2} (continuum normalization)
};

MassSplit ansatz_mass_split(const ProblemCtx& ctx, const Ansatz& ansatz);

// Exact radial closed form of int u*: the grid mean must reproduce it to
// rounding, and it extends to arbitrarily small t (no resolution limit), so
// the O(t^2 |ln t|) rate is checkable where the asymptotics actually hold.
double ustar_mean_radial(const BubbleParams& bp);

// Density h e^{U - G_t2 + phi} via the factorized weight; returned with its
// discrete integral (in the pair's shifted normalization).
struct Density {
    PeriodicField normalized; // integrates to 1 discretely
    double total = 0.0;
};
Density assemble_density(const ProblemCtx& ctx, const PeriodicField& U,
                         const PeriodicField* phi = nullptr);

} // namespace mfb

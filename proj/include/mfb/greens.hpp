// Green's function of -Delta on the flat unit torus:
//   -Delta G(.,p) = delta_p - 1,  int G = 0,
// its regular part R(x,p) = G(x,p) + ln(d(x,p))/(2 pi) (torus distance d),
// and the collapsing-pair combinations G_t^(2), R_t^(2), e^{-G_t^(2)}.
//
// Evaluation is by Ewald splitting: a short-range part (1/4pi) E_1(b^2 r^2)
// summed over lattice images carries the log singularity exactly, and the
// complementary Gaussian-screened Fourier series converges superexponentially.
// The identity holds for every splitting parameter b, which gives a built-in
// two-path accuracy check.
//
// Two evaluators share the identity:
//  * pointwise: fixed b = 6, usable at arbitrary points, machine precision;
//  * grid fields: b = n/8, one FFT for the Fourier part plus a local E_1
//    stencil, exact at the nodes.
//
// Normalization: pointwise values carry the continuum normalization
// (int G = 0 exactly).  Field-returning ops subtract the discrete sample
// mean (the sampled log spike integrates to ~1e-6, not 0) and record the
// shift, so field-vs-field identities stay exact while field contracts
// (mean zero to 1e-10) hold.
#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "mfb/grid.hpp"

namespace mfb {

class Greens {
public:
    explicit Greens(Grid g);

    // Pointwise continuum evaluation (any x, p).
    double green_at(Vec2 x, Vec2 p) const;
    double regular_at(Vec2 x, Vec2 p) const; // smooth through x = p
    Vec2 regular_grad_x(Vec2 x, Vec2 p) const;
    double robin() const { return robin_; } // R(p,p), p-independent on the flat torus

    // Continuum-normalized samples of G(.,p); the node at p (if any) stores
    // the regular value R(p,p).  Cached per source point.
    const PeriodicField& field(Vec2 p) const;

    // Spec op: the mean-zero field (discrete mean subtracted).
    PeriodicField green(Vec2 p) const;
    // Discrete sample mean of field(p) — the shift green() removes.
    double field_mean(Vec2 p) const;

    Grid grid;

private:
    PeriodicField build_field(Vec2 p) const;

    double robin_ = 0.0;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<long long, long long>, std::unique_ptr<PeriodicField>> cache_;
};

struct CollapsePair {
    double t = 0.0;
    Vec2 e{1.0, 0.0};

    Vec2 source_plus() const { return {t * e.x, t * e.y}; }
    Vec2 source_minus() const { return {-t * e.x, -t * e.y}; }
};

// Validates |e| = 1 and 0 < t < r0/2.
CollapsePair make_collapse_pair(double t, Vec2 e, double r0);

// Grid realizations of G_t^(2), R_t^(2) and the factorized singular weight.
// potential and regular share one additive normalization (shift below), so
// potential == regular - 2 ln d_+ - 2 ln d_- holds exactly on samples.
class CollapseFields {
public:
    CollapseFields(const Greens& greens, const CollapsePair& pair);

    const CollapsePair& pair() const { return pair_; }
    const PeriodicField& potential() const { return potential_; } // mean zero
    const PeriodicField& regular() const { return regular_; }
    const PeriodicField& weight() const { return weight_; } // d+^2 d-^2 e^{-R_t2}
    double shift() const { return shift_; } // continuum value minus stored sample

    // Pointwise continuum evaluation (no shift).
    double regular_at(Vec2 x) const;
    double weight_at(Vec2 x) const;

private:
    const Greens& greens_;
    CollapsePair pair_;
    PeriodicField potential_, regular_, weight_;
    double shift_ = 0.0;
};

} // namespace mfb

// Projected linear theory and the nonlinear solve: the cutoff, approximate
// kernels hatY / Z, the weighted X / Y norms, the projection Q, the
// linearized operator L, the bordered (multiplier) linear solve, the
// contraction iteration for the correction phi, and the outer adjustment of
// the bubble location q that zeroes the multipliers.
#pragma once

#include <array>
#include <vector>

#include "mfb/bubble_ansatz.hpp"

namespace mfb {

struct NormParams {
    double p = 1.5;      // outer L^p exponent, p in (1,2]
    double alpha = 0.25; // inner weight exponent, 0 < alpha < 1/2
};

struct ReductionFrame {
    BubbleParams params;
    NormParams norms;
    PeriodicField chi;
    std::array<PeriodicField, 2> hatY;
    std::array<PeriodicField, 2> Z;
    // gram[i][k] = <Z_k, hatY_i> (discrete grid pairing; the projection uses
    // this 2x2 system so Q is exactly idempotent in the discrete space)
    std::array<std::array<double, 2>, 2> gram{};
    // analytic (Lemma 4.2(ii)) energies by radial quadrature — the continuum
    // denominators of the projection coefficients; reported and cross-checked
    // against the grid pairing
    std::array<double, 2> energy{};
    Density density; // normalized density at U (for the linearized operator)

    // bordered-solve workspace: L^{-1} Z_i is g-independent, so the two
    // kernel columns are solved once per frame and every later right-hand
    // side costs a single Krylov solve plus a 2x2 system
    std::array<PeriodicField, 2> reg_cols;
    bool solver_ready = false;
};

// Radial cutoff profile: 1 on [0, tR0/2], quintic smoothstep down to 0 at
// tR0; C^2 with |chi'| = O(1/t), |chi''| = O(1/t^2).
double cutoff_value(double r, double t, double R0);
double cutoff_d1(double r, double t, double R0);
double cutoff_d2(double r, double t, double R0);

ReductionFrame build_frame(const ProblemCtx& ctx, const Ansatz& ansatz, const NormParams& np);

double norm_X(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& phi);
double norm_Y(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& g);

struct Projection {
    PeriodicField g;          // g - sum_i c_i Z_i
    std::array<double, 2> c{}; // projection coefficients
};
Projection project_Q(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& g);

// L phi = Delta phi + rho D (phi - <phi>_D), D the normalized ansatz density.
PeriodicField apply_L(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& phi);

struct ReducedSolveOptions {
    double lin_tol = 1e-9; // max-norm of the bordered residual
    int max_iter = 900;
    int restart = 60;
};

struct ReducedSolveResult {
    PeriodicField phi;
    std::array<double, 2> c{};
    double x_norm = 0.0; // ||phi||_X
    double y_norm = 0.0; // ||g||_Y of the input
    double sup_norm = 0.0;
    double bound_ratio = 0.0; // (||phi||_inf + ||phi||_X) / (|ln t| ||g||_Y)
    int linear_iters = 0;
    double residual = 0.0; // max-norm of L phi - sum c_i Z_i - g
};

// Bordered system: L phi = g + c1 Z1 + c2 Z2, <phi, Z_i> = 0, int phi = 0.
// Realized through the rank-2 regularized operator L + mu sum Z_i <Z_i, .>
// (Poisson-preconditioned GMRES); the multipliers come out of a 2x2 solve.
ReducedSolveResult solve_reduced(const ProblemCtx& ctx, ReductionFrame& fr,
                                 const PeriodicField& g, const ReducedSolveOptions& opt = {},
                                 const PeriodicField* phi0 = nullptr);

// Piecewise-analytic Delta u*: the closed-form bubble Laplacian plus
// 8pi(1-theta) (Delta R = 1 on the ball) plus Delta w from the base equation.
PeriodicField laplacian_ustar(const ProblemCtx& ctx, const Ansatz& ansatz);

// Exact nonlinear residual g_{t,q}(phi) rearranged per the fixed-point form.
PeriodicField residual_g(const ProblemCtx& ctx, const Ansatz& ansatz, const ReductionFrame& fr,
                         const PeriodicField& phi);

// Full equation residual Delta u + rho (D_phi - 1) with u = U + phi,
// Delta u = laplacian_ustar + spectral Delta phi.  Equals L phi - g(phi).
PeriodicField equation_residual(const ProblemCtx& ctx, const Ansatz& ansatz,
                                const ReductionFrame& fr, const PeriodicField& phi);

struct ContractionOptions {
    double fp_tol = 1e-10;
    int max_fp_iter = 40;
    ReducedSolveOptions linear{};
};

struct ContractionResult {
    PeriodicField phi;
    std::array<double, 2> c{};           // multipliers of the last linear solve
    std::vector<double> step_norms;      // sup-norm of successive differences
    std::vector<double> contraction_factors;
    double sup_norm = 0.0;
    double x_norm = 0.0;
    double ball_radius = 0.0; // t^{2/p} |ln t|^2
    double bound_ratio = 0.0; // from the last linear solve
    int iterations = 0;
};

ContractionResult contraction_solve(const ProblemCtx& ctx, const Ansatz& ansatz,
                                    ReductionFrame& fr, const ContractionOptions& opt = {},
                                    const PeriodicField* warm_start = nullptr);

struct AdjustOptions {
    double c_tol = 1e-10; // stricter than the reporting threshold 1e-8
    int max_outer = 30;
    double jac_cond_limit = 1e8;
    ContractionOptions contraction{};
    NormParams norms{};
};

struct AdjustResult {
    Vec2 q_star{0.0, 0.0};
    BubbleParams params;
    Ansatz ansatz;
    ReductionFrame frame;
    ContractionResult contraction;
    int outer_iters = 0;
    bool jacobian_singular = false;
    std::vector<double> c_history; // max |c| per outer iteration
};

// Newton on q -> c(q) with forward-difference Jacobian (step t/100); every
// evaluation reruns the contraction solve (warm-started).
AdjustResult adjust_q(const ProblemCtx& ctx, Vec2 q0, const AdjustOptions& opt = {});

struct KernelMassDiagnostics {
    double m0 = 0.0; // int_{B_Gamma} Delta psi dz
    double m1 = 0.0; // int_{B_Gamma} psi / (1+|z|^2)^2 dz
    double m2 = 0.0; // int_{B_Gamma} 16 psi chi (1-|z|^2)/(1+|z|^2)^3 dz
    double log_t_factor = 0.0; // |ln t|
};

KernelMassDiagnostics kernel_mass_diagnostics(const ProblemCtx& ctx, const ReductionFrame& fr,
                                              const PeriodicField& phi);

} // namespace mfb

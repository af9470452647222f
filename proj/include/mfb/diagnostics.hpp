// Blow-up diagnostics on computed solutions: local mass, the Pohozaev
// identity, the rescaled profile fit against the standard bubble, the outer
// error against w + 8 pi G, and the t-sweep harness with rate fits.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfb/config.hpp"
#include "mfb/reduction.hpp"

namespace mfb {

// rho * int_{B_r(tq)} h e^{u - G_t2} / int_M h e^{u - G_t2}
double local_mass(const ProblemCtx& ctx, const PeriodicField& u, Vec2 q, double r);

struct PohozaevCheck {
    double sigma0 = 0.0;   // local mass at the intermediate scale r = sqrt(t)
    double m0 = 0.0;       // scaled-coordinates mass over B_R(0), R = Gamma/2
    double residual = 0.0; // (s0 - m0)(s0 + m0) - 24 pi (s0 - m0)
};
PohozaevCheck pohozaev_check(const ProblemCtx& ctx, const PeriodicField& u,
                             const BubbleParams& bp);

struct ProfileFit {
    Vec2 p_t{0.0, 0.0};     // argmax of vbar_t in the y-chart
    double lambda_meas = 0.0;
    double eta_max_weighted = 0.0; // max |eta~| / (1+|z|)^eps over |z| <= Gamma/2
    double prop2e_combo = 0.0;     // lambda + 2 ln t + 2 ln C_t + 8 pi R - mass log
};
ProfileFit profile_fit(const ProblemCtx& ctx, const PeriodicField& u, const BubbleParams& bp,
                       double eps = 0.25);

// sup over grid nodes outside B_{2tR0}(tq*) of |u - w - 8 pi G(., tq*)|
double outer_error(const ProblemCtx& ctx, const PeriodicField& u, Vec2 q_star, double R0);

struct SolveReport {
    double t = 0.0;
    double grid_n = 0;
    Vec2 q_star{0.0, 0.0};
    double lambda_tq = 0.0;   // ansatz height parameter lambda_{t,q}
    double lambda_pred = 0.0; // predicted vbar peak: lambda_{t,q} - w(tq*)
    double lambda_meas = 0.0;
    double rho_t = 0.0;            // local mass over B_{tR0}(tq*)
    double sigma0 = 0.0;
    double m0 = 0.0;
    double pohozaev_residual = 0.0;
    double outer_err = 0.0;
    double eta_max_weighted = 0.0;
    double residual = 0.0; // max-norm PDE residual of the final u
    double mean_u = 0.0;
    double c1 = 0.0, c2 = 0.0;
    double phi_sup = 0.0, phi_x_norm = 0.0, ball_radius = 0.0;
    double bound_ratio = 0.0;
    double contraction_factor = 0.0; // last observed ratio
    int contraction_iters = 0;
    int adjust_iters = 0;
    double mean_ustar = 0.0;
    double ansatz_outer_dev = 0.0; // sup over M \ B_{tR0} of |U - w - 8 pi G|
    double inner_mass = 0.0;
    double aconst = 0.0;
    double interface_jump_c0 = 0.0;
    double interface_jump_c1 = 0.0;
    double km_m0 = 0.0, km_m1 = 0.0, km_m2 = 0.0; // kernel-mass diagnostics
    double margin = 0.0;
    std::vector<double> sigma0_curve_r;
    std::vector<double> sigma0_curve;
};

// Owns every stage of a single-t solve so reports and tests can reuse the
// intermediate objects.
struct SolveRun {
    Grid grid;
    Greens greens;
    WeightSpec wspec;
    PeriodicField h;
    BaseState base;
    CollapsePair cpair;
    CollapseFields pair;
    Interpolator w_interp;
    ProblemCtx ctx;
    AdjustResult adjusted;
    PeriodicField u; // final solution U + phi, mean zero
    SolveReport report;

    SolveRun(const ProblemConfig& cfg, double t, int n);
};

// Full pipeline for one t value (base solve, ansatz, frame, contraction,
// q-adjustment, diagnostics).
std::unique_ptr<SolveRun> solve_single(const ProblemConfig& cfg, double t, int n);

// Resolution-driven grid choice: smallest power of two >= target_factor *
// Lambda (estimated on a coarse pilot grid), clamped to [min_n, max_n].
int choose_grid(const ProblemConfig& cfg, double t);

struct FitResult {
    double exponent = 0.0;
    double half_width = 0.0; // 95%-ish confidence half width from the LS fit
    double offset = 0.0;
};

// Least-squares slope of ln(value) against ln(t); values <= 0 are rejected.
FitResult fit_exponent(const std::vector<double>& ts, const std::vector<double>& values);

struct SweepResult {
    std::vector<double> ts;
    std::vector<int> grids;
    std::vector<SolveReport> reports;
    std::vector<std::string> failures; // per-point error messages, empty on success
    FitResult fit_mean_ustar;  // |int u*| / |ln t|  -> target exponent 2
    FitResult fit_rho_t;       // |rho_t - 8 pi|
    FitResult fit_outer;       // outer error
    FitResult fit_lambda_gap;  // |lambda_meas - lambda_pred|
};

SweepResult run_sweep(const ProblemConfig& cfg);

} // namespace mfb

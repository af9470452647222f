#include "mfb/reduction.hpp"

#include <cmath>
#include <cstdio>

#include "mfb/errors.hpp"
#include "mfb/linsolve.hpp"
#include "mfb/liouville.hpp"
#include "mfb/par.hpp"
#include "mfb/quadrature.hpp"

namespace mfb {
namespace {
constexpr double kPi = 3.14159265358979323846264338328;

double sq(double x) { return x * x; }
} // namespace

// C-infinity logistic transition chi = 1/(1 + e^{psi}), psi = 1/(1-u) - 1/u
// on the annulus.  A merely C^2 profile leaves O(h^2) quadrature errors from
// its third-derivative jumps (~1e-6 at n = 1024), far above the 1e-9 targets
// the frame identities carry; the smooth profile keeps every grid sum at
// spectral accuracy while obeying the same O(1/t), O(1/t^2) bounds.
namespace {

struct CutoffEval {
    double chi, d1, d2; // derivatives with respect to u in [0,1]
};

CutoffEval cutoff_profile(double u) {
    const double psi = 1.0 / (1.0 - u) - 1.0 / u;
    if (psi > 40.0) return {0.0, 0.0, 0.0};
    if (psi < -40.0) return {1.0, 0.0, 0.0};
    const double e = std::exp(psi);
    const double chi = 1.0 / (1.0 + e);
    const double dpsi = 1.0 / sq(1.0 - u) + 1.0 / sq(u);
    const double ddpsi = 2.0 / (sq(1.0 - u) * (1.0 - u)) - 2.0 / (sq(u) * u);
    const double d1 = -chi * (1.0 - chi) * dpsi;
    const double d2 = chi * (1.0 - chi) * ((2.0 * chi - 1.0) * sq(dpsi) - ddpsi);
    return {chi, d1, d2};
}

} // namespace

double cutoff_value(double r, double t, double R0) {
    const double a = 0.5 * t * R0, b = t * R0;
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    return cutoff_profile((r - a) / (b - a)).chi;
}

double cutoff_d1(double r, double t, double R0) {
    const double a = 0.5 * t * R0, b = t * R0;
    if (r <= a || r >= b) return 0.0;
    return cutoff_profile((r - a) / (b - a)).d1 / (b - a);
}

double cutoff_d2(double r, double t, double R0) {
    const double a = 0.5 * t * R0, b = t * R0;
    if (r <= a || r >= b) return 0.0;
    return cutoff_profile((r - a) / (b - a)).d2 / sq(b - a);
}

namespace {

// Z in scaled coordinates, divided by Lambda^2:
//   -(Delta chi) Y_i - 2 chi'(|z|) (zhat . grad Y_i) + 8 chi (1+chi) z_i /(1+|z|^2)^3
// with chi profiles expressed as functions of |z| = Lambda r.
double z_profile(const BubbleParams& bp, Vec2 z, int i) {
    const double rz = norm(z);
    const double zi = (i == 1) ? z.x : z.y;
    const double r2 = z.x * z.x + z.y * z.y;
    const double onepr2 = 1.0 + r2;
    // chi as a function of |z|: chi(|z|/Lambda); derivatives pick up 1/Lambda
    const double rx = rz / bp.Lambda;
    const double c = cutoff_value(rx, bp.t, bp.R0);
    const double c1 = cutoff_d1(rx, bp.t, bp.R0) / bp.Lambda;
    const double c2 = cutoff_d2(rx, bp.t, bp.R0) / sq(bp.Lambda);
    double lap_chi = c2;
    if (rz > 0.0) lap_chi += c1 / rz;
    const double Yi = zi / onepr2;
    double radial_dY = 0.0;
    if (rz > 0.0) radial_dY = zi * (1.0 - r2) / (rz * sq(onepr2));
    return -lap_chi * Yi - 2.0 * c1 * radial_dY + 8.0 * c * (1.0 + c) * zi / (sq(onepr2) * onepr2);
}

} // namespace

ReductionFrame build_frame(const ProblemCtx& ctx, const Ansatz& ansatz, const NormParams& np) {
    if (!(np.alpha > 0.0 && np.alpha < 0.5))
        throw ConfigError("norm parameter alpha must lie in (0, 1/2)");
    if (!(np.p > 1.0 && np.p <= 2.0)) throw ConfigError("norm parameter p must lie in (1, 2]");

    const BubbleParams& bp = ansatz.params;
    const Grid g = ansatz.U.grid;
    const int n = g.n;
    if (1.0 / bp.Lambda < 8.0 / n) throw UnderResolvedError("frame: bubble core under-resolved");

    ReductionFrame fr;
    fr.params = bp;
    fr.norms = np;
    const Vec2 tq = ctx.tq(bp.q);

    fr.chi = PeriodicField(g);
    fr.hatY[0] = PeriodicField(g);
    fr.hatY[1] = PeriodicField(g);
    fr.Z[0] = PeriodicField(g);
    fr.Z[1] = PeriodicField(g);
    const double L2 = sq(bp.Lambda);
    par::for_each(fr.chi.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const Vec2 off = torus_offset(g.node(i, j), tq);
        const double r = norm(off);
        const Vec2 z{bp.Lambda * off.x, bp.Lambda * off.y};
        const double c = cutoff_value(r, bp.t, bp.R0);
        fr.chi[k] = c;
        const double onepz2 = 1.0 + z.x * z.x + z.y * z.y;
        fr.hatY[0][k] = c * z.x / onepz2;
        fr.hatY[1][k] = c * z.y / onepz2;
        fr.Z[0][k] = (c > 0.0 || r < bp.t * bp.R0 * 1.001) ? L2 * z_profile(bp, z, 1) : 0.0;
        fr.Z[1][k] = (c > 0.0 || r < bp.t * bp.R0 * 1.001) ? L2 * z_profile(bp, z, 2) : 0.0;
    });

    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) fr.gram[size_t(i)][size_t(k)] = inner(fr.Z[size_t(k)], fr.hatY[size_t(i)]);

    // analytic energy: pi * int [ ((chi f)')^2 + (chi f / r)^2 + 8 chi^3 f^2/(1+r^2)^2 ] r dr,
    // f(r) = r/(1+r^2), in scaled coordinates
    auto energy_integrand = [&](double r) {
        const double f = r / (1.0 + r * r);
        const double fp = (1.0 - r * r) / sq(1.0 + r * r);
        const double rx = r / bp.Lambda;
        const double c = cutoff_value(rx, bp.t, bp.R0);
        const double c1 = cutoff_d1(rx, bp.t, bp.R0) / bp.Lambda;
        const double cf_p = c1 * f + c * fp;
        const double cf_over_r = (r > 0.0) ? c * f / r : c;
        return kPi * r * (sq(cf_p) + sq(cf_over_r) + 8.0 * c * c * c * f * f / sq(1.0 + r * r));
    };
    const QuadResult e_core = integrate_adaptive(energy_integrand, 0.0, 0.5 * bp.Gamma, 1e-12);
    const QuadResult e_ann = integrate_adaptive(energy_integrand, 0.5 * bp.Gamma, bp.Gamma, 1e-12);
    fr.energy[0] = fr.energy[1] = e_core.value + e_ann.value;

    fr.density = assemble_density(ctx, ansatz.U);
    return fr;
}

namespace {

struct RegionMasks {
    // node classification against B_{tR0}(tq) and B_{tR0/2}(tq)
    std::vector<double> dist; // torus distance to tq
};

RegionMasks make_masks(const ProblemCtx& ctx, const BubbleParams& bp, Grid g) {
    RegionMasks m;
    const int n = g.n;
    const Vec2 tq = ctx.tq(bp.q);
    m.dist.resize(size_t(g.size()));
    par::for_each(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        m.dist[size_t(k)] = torus_dist(g.node(i, j), tq);
    });
    return m;
}

} // namespace

double norm_X(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& phi) {
    if (std::abs(integrate(phi)) > 1e-8)
        throw NonZeroMeanError("norm_X requires a mean-zero field");
    const BubbleParams& bp = fr.params;
    const Grid g = phi.grid;
    const double cell = 1.0 / double(g.size());
    const RegionMasks m = make_masks(ctx, bp, g);
    const PeriodicField lap = laplacian(phi);
    const double rc = bp.t * bp.R0;
    const double expo = 2.0 + fr.norms.alpha;

    const double in1 = par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        const double d = m.dist[size_t(k)];
        if (d >= rc) return 0.0;
        return sq(lap[k] / sq(bp.Lambda)) * std::pow(1.0 + bp.Lambda * d, expo) * sq(bp.Lambda);
    }) * cell;
    const double in2 = par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        const double d = m.dist[size_t(k)];
        if (d >= rc) return 0.0;
        return sq(phi[k]) * std::pow(1.0 + bp.Lambda * d, -expo) * sq(bp.Lambda);
    }) * cell;
    const double p = fr.norms.p;
    const double out1 = std::pow(par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        return (m.dist[size_t(k)] > 0.5 * rc) ? std::pow(std::abs(lap[k]), p) : 0.0;
    }) * cell, 1.0 / p);
    const double out2 = std::pow(par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        return (m.dist[size_t(k)] > 0.5 * rc) ? std::pow(std::abs(phi[k]), p) : 0.0;
    }) * cell, 1.0 / p);
    return std::sqrt(in1) + std::sqrt(in2) + out1 + out2;
}

double norm_Y(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& gfield) {
    if (std::abs(integrate(gfield)) > 1e-8)
        throw NonZeroMeanError("norm_Y requires a mean-zero field");
    const BubbleParams& bp = fr.params;
    const Grid g = gfield.grid;
    const double cell = 1.0 / double(g.size());
    const RegionMasks m = make_masks(ctx, bp, g);
    const double rc = bp.t * bp.R0;
    const double expo = 2.0 + fr.norms.alpha;
    const double scale_in = sq(bp.t) * std::exp(-bp.lambda);

    const double in1 = par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        const double d = m.dist[size_t(k)];
        if (d >= rc) return 0.0;
        return sq(gfield[k]) * std::pow(1.0 + bp.Lambda * d, expo) * sq(bp.Lambda);
    }) * cell;
    const double p = fr.norms.p;
    const double out = std::pow(par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        return (m.dist[size_t(k)] > 0.5 * rc) ? std::pow(std::abs(gfield[k]), p) : 0.0;
    }) * cell, 1.0 / p);
    return scale_in * std::sqrt(in1) + out;
}

Projection project_Q(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& g) {
    Projection pr;
    const double b0 = inner(g, fr.hatY[0]);
    const double b1 = inner(g, fr.hatY[1]);
    const auto& G = fr.gram;
    const double det = G[0][0] * G[1][1] - G[0][1] * G[1][0];
    pr.c[0] = (b0 * G[1][1] - b1 * G[0][1]) / det;
    pr.c[1] = (G[0][0] * b1 - G[1][0] * b0) / det;
    pr.g = g;
    axpy(pr.g, -pr.c[0], fr.Z[0]);
    axpy(pr.g, -pr.c[1], fr.Z[1]);
    return pr;
}

PeriodicField apply_L(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& phi) {
    PeriodicField out = laplacian(phi);
    const PeriodicField& D = fr.density.normalized;
    const double mean_D_phi = inner(D, phi);
    const double rho = ctx.rho;
    par::for_each(out.size(), [&](std::ptrdiff_t k) { out[k] += rho * D[k] * (phi[k] - mean_D_phi); });
    return out;
}

namespace {

// Solve L x = b by Poisson-preconditioned GMRES with true-residual
// refinement down to the double-precision evaluation floor
// (~1e-11 * ||rhs scale||).  L applied to the approximate kernels gives
// roughly -Z (large in the flat metric), so the discrete L is uniformly
// invertible on mean-zero fields and needs no bordering shift.
struct RegSolveStats {
    int iterations = 0;
    double residual = 0.0;
};

RegSolveStats solve_reg(const ProblemCtx& ctx, const ReductionFrame& fr, const PeriodicField& b,
                        PeriodicField& x, const ReducedSolveOptions& opt,
                        const PeriodicField* x0) {
    const Grid grid = b.grid;
    ApplyFn apply = [&](const FlatVec& in, FlatVec& out) {
        PeriodicField phi(grid);
        phi.v = in;
        out = apply_L(ctx, fr, phi).v;
    };
    ApplyFn precond = [&](const FlatVec& in, FlatVec& out) {
        PeriodicField r(grid);
        r.v = in;
        project_mean_zero(r);
        PeriodicField u = solve_poisson_meanzero(r);
        scale(u, -1.0);
        out = u.v;
    };
    GmresOptions gopt;
    gopt.restart = opt.restart;
    gopt.max_iter = opt.max_iter;
    gopt.rel_tol = 1e-14;

    FlatVec xf(b.v.size(), 0.0);
    if (x0) xf = x0->v;
    RegSolveStats st;
    const double target = std::max(opt.lin_tol, 1e-11 * (max_abs(b) + 1.0));
    double prev = 1e300;
    for (int pass = 0; pass < 5; ++pass) {
        const GmresResult lin = gmres(apply, precond, b.v, xf, gopt);
        st.iterations += lin.iterations;
        PeriodicField xcur(grid);
        xcur.v = xf;
        PeriodicField res = apply_L(ctx, fr, xcur);
        axpy(res, -1.0, b);
        st.residual = max_abs(res);
        x = xcur;
        if (st.residual <= target) return st;
        if (st.residual > 0.5 * prev) break; // stalled at the evaluation floor
        prev = st.residual;
    }
    if (st.residual > 1e4 * target) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "solve_reduced: inner solve stalled at %.3e (target %.3e)",
                      st.residual, target);
        throw LinearNoConvergenceError(buf);
    }
    return st;
}

} // namespace

ReducedSolveResult solve_reduced(const ProblemCtx& ctx, ReductionFrame& fr,
                                 const PeriodicField& g, const ReducedSolveOptions& opt,
                                 const PeriodicField* phi0) {
    const Grid grid = g.grid;
    ReducedSolveResult out;

    if (!fr.solver_ready) {
        for (int i = 0; i < 2; ++i) {
            PeriodicField zi = fr.Z[size_t(i)];
            project_mean_zero(zi);
            PeriodicField col(grid);
            const RegSolveStats st = solve_reg(ctx, fr, zi, col, opt, nullptr);
            out.linear_iters += st.iterations;
            fr.reg_cols[size_t(i)] = std::move(col);
        }
        fr.solver_ready = true;
    }

    PeriodicField gz = g;
    project_mean_zero(gz);
    PeriodicField x0(grid);
    const RegSolveStats st = solve_reg(ctx, fr, gz, x0, opt, phi0);
    out.linear_iters += st.iterations;

    // phi = x0 + sum_i c_i col_i with <phi, Z_j> = 0
    double M[2][2], b2[2];
    for (int j = 0; j < 2; ++j) {
        b2[j] = inner(x0, fr.Z[size_t(j)]);
        for (int i = 0; i < 2; ++i) M[j][i] = inner(fr.reg_cols[size_t(i)], fr.Z[size_t(j)]);
    }
    const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    out.c[0] = -(b2[0] * M[1][1] - b2[1] * M[0][1]) / det;
    out.c[1] = -(M[0][0] * b2[1] - M[1][0] * b2[0]) / det;

    out.phi = x0;
    axpy(out.phi, out.c[0], fr.reg_cols[0]);
    axpy(out.phi, out.c[1], fr.reg_cols[1]);
    project_mean_zero(out.phi);

    // true residual of L phi - sum c_i Z_i - g
    PeriodicField res = apply_L(ctx, fr, out.phi);
    par::for_each(res.size(), [&](std::ptrdiff_t k) {
        res[k] -= out.c[0] * fr.Z[0][k] + out.c[1] * fr.Z[1][k] + gz[k];
    });
    out.residual = max_abs(res);
    const double target = std::max(opt.lin_tol, 1e-11 * (max_abs(gz) + 1.0));
    if (out.residual > 1e4 * target) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "solve_reduced: residual %.3e exceeds target %.3e",
                      out.residual, target);
        throw LinearNoConvergenceError(buf);
    }

    out.sup_norm = max_abs(out.phi);
    out.x_norm = norm_X(ctx, fr, out.phi);
    out.y_norm = norm_Y(ctx, fr, gz);
    const double logt = std::abs(std::log(fr.params.t));
    out.bound_ratio = (out.sup_norm + out.x_norm) / (logt * out.y_norm);
    return out;
}

PeriodicField laplacian_ustar(const ProblemCtx& ctx, const Ansatz& ansatz) {
    const BubbleParams& bp = ansatz.params;
    const Grid g = ansatz.U.grid;
    const int n = g.n;
    const Vec2 tq = ctx.tq(bp.q);
    const double rc = bp.t * bp.R0;
    const double L2 = sq(bp.Lambda);

    // Delta w from the base equation (exact to the Newton tolerance)
    PeriodicField he_w(g);
    par::for_each(he_w.size(), [&](std::ptrdiff_t k) { he_w[k] = ctx.h[k] * std::exp(ctx.base.w[k]); });
    const double total = integrate(he_w);

    PeriodicField out(g);
    par::for_each(out.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const double d = torus_dist(g.node(i, j), tq);
        const double lap_w = -(ctx.rho - 8.0 * kPi) * (he_w[k] / total - 1.0);
        double v = 8.0 * kPi * (1.0 - bp.theta) + lap_w;
        if (d < rc) v += -8.0 * L2 / sq(1.0 + L2 * d * d);
        out[k] = v;
    });
    return out;
}

PeriodicField residual_g(const ProblemCtx& ctx, const Ansatz& ansatz, const ReductionFrame& fr,
                         const PeriodicField& phi) {
    const Grid g = ansatz.U.grid;
    const Density dens_phi = assemble_density(ctx, ansatz.U, &phi);
    const PeriodicField& D0 = fr.density.normalized;
    const double mean_D0_phi = inner(D0, phi);
    const PeriodicField lap_us = laplacian_ustar(ctx, ansatz);
    const double rho = ctx.rho;

    PeriodicField out(g);
    par::for_each(out.size(), [&](std::ptrdiff_t k) {
        out[k] = -lap_us[k] + rho - rho * dens_phi.normalized[k] +
                 rho * D0[k] * (phi[k] - mean_D0_phi);
    });
    project_mean_zero(out); // analytic mean is zero; remove quadrature dust
    return out;
}

PeriodicField equation_residual(const ProblemCtx& ctx, const Ansatz& ansatz,
                                const ReductionFrame& fr, const PeriodicField& phi) {
    const Grid g = ansatz.U.grid;
    const Density dens_phi = assemble_density(ctx, ansatz.U, &phi);
    const PeriodicField lap_us = laplacian_ustar(ctx, ansatz);
    const PeriodicField lap_phi = laplacian_precise(phi);
    const double rho = ctx.rho;
    PeriodicField out(g);
    par::for_each(out.size(), [&](std::ptrdiff_t k) {
        out[k] = lap_us[k] + lap_phi[k] + rho * (dens_phi.normalized[k] - 1.0);
    });
    return out;
}

ContractionResult contraction_solve(const ProblemCtx& ctx, const Ansatz& ansatz,
                                    ReductionFrame& fr, const ContractionOptions& opt,
                                    const PeriodicField* warm_start) {
    const BubbleParams& bp = ansatz.params;
    ContractionResult out;
    out.ball_radius = std::pow(bp.t, 2.0 / fr.norms.p) * sq(std::log(bp.t));

    PeriodicField phi = warm_start ? *warm_start : PeriodicField(ansatz.U.grid);
    if (warm_start) project_mean_zero(phi);

    // the equation residual feels L applied to the last step, which carries
    // bubble-scale curvature ~ (2 pi Lambda)^2; iterate the sup-norm
    // difference down far enough that this stays inside the residual budget
    const double fp_tol = std::min(opt.fp_tol, 1e-8 / sq(2.0 * kPi * bp.Lambda));

    double prev_step = -1.0;
    for (int it = 0; it < opt.max_fp_iter; ++it) {
        const PeriodicField gk = residual_g(ctx, ansatz, fr, phi);
        const ReducedSolveResult sol = solve_reduced(ctx, fr, gk, opt.linear, &phi);
        PeriodicField diff = sol.phi;
        axpy(diff, -1.0, phi);
        const double step = max_abs(diff);
        out.step_norms.push_back(step);
        if (prev_step > 0.0) out.contraction_factors.push_back(step / prev_step);
        prev_step = step;
        phi = sol.phi;
        out.c = sol.c;
        out.bound_ratio = sol.bound_ratio;
        out.iterations = it + 1;

        // divergence guard: growing steps or a wildly large iterate (the
        // literal 2 r_S ball is a constants-free asymptotic statement; at
        // desk t the X-norm part sits well above it, so membership is
        // reported rather than enforced)
        const size_t ns = out.step_norms.size();
        const bool growing = ns >= 3 && out.step_norms[ns - 1] > opt.fp_tol &&
                             out.step_norms[ns - 1] > 1.5 * out.step_norms[ns - 2] &&
                             out.step_norms[ns - 2] > 1.5 * out.step_norms[ns - 3];
        if (growing || max_abs(phi) > 1e3)
            throw ContractionDivergedError("contraction diverging: step " + std::to_string(step) +
                                           " after " + std::to_string(it + 1) + " iterations");
        // converged, or stalled at the linear-solve noise floor below the
        // user-level tolerance
        const bool stalled = step < opt.fp_tol && prev_step > 0.0 &&
                             out.step_norms.size() >= 2 &&
                             step > 0.5 * out.step_norms[out.step_norms.size() - 2];
        if (step < fp_tol || stalled) {
            out.phi = phi;
            out.sup_norm = max_abs(phi);
            out.x_norm = norm_X(ctx, fr, phi);
            return out;
        }
    }
    throw ContractionDivergedError("contraction: no convergence in " +
                                   std::to_string(opt.max_fp_iter) + " iterations");
}

namespace {

struct QEval {
    Ansatz ansatz;
    ReductionFrame frame;
    ContractionResult contraction;
};

QEval eval_at_q(const ProblemCtx& ctx, Vec2 q, const AdjustOptions& opt,
                const PeriodicField* warm) {
    QEval ev;
    const BubbleParams bp = derive_params(ctx, q);
    ev.ansatz = assemble_ansatz(ctx, bp);
    ev.frame = build_frame(ctx, ev.ansatz, opt.norms);
    ev.contraction = contraction_solve(ctx, ev.ansatz, ev.frame, opt.contraction, warm);
    return ev;
}

} // namespace

AdjustResult adjust_q(const ProblemCtx& ctx, Vec2 q0, const AdjustOptions& opt) {
    const double t = ctx.t();
    const double qmax = t * std::abs(std::log(t));
    if (norm(q0) >= qmax)
        throw ConfigError("adjust_q: initial q must lie in B_{t |ln t|}(0)");

    AdjustResult out;
    Vec2 q = q0;
    QEval ev = eval_at_q(ctx, q, opt, nullptr);
    out.c_history.push_back(std::max(std::abs(ev.contraction.c[0]), std::abs(ev.contraction.c[1])));

    const double fd = t / 100.0;
    double J[2][2] = {{0, 0}, {0, 0}};
    bool have_jacobian = false;
    int jacobian_age = 0;

    for (int it = 0; it < opt.max_outer; ++it) {
        const double cmax = std::max(std::abs(ev.contraction.c[0]), std::abs(ev.contraction.c[1]));
        // converged, or stalled below the looser reporting threshold
        const bool stalled = out.c_history.size() >= 3 &&
                             cmax > 0.5 * out.c_history[out.c_history.size() - 2] &&
                             cmax < 1e-8;
        if (cmax < opt.c_tol || stalled) {
            out.q_star = q;
            out.params = ev.ansatz.params;
            out.ansatz = std::move(ev.ansatz);
            out.frame = std::move(ev.frame);
            out.contraction = std::move(ev.contraction);
            out.outer_iters = it;
            return out;
        }

        // forward-difference Jacobian of q -> c(q), warm-started and reused
        // for a few Newton steps (the map is nearly affine near the root)
        if (!have_jacobian || jacobian_age >= 4) {
            QEval e1 = eval_at_q(ctx, {q.x + fd, q.y}, opt, &ev.contraction.phi);
            QEval e2 = eval_at_q(ctx, {q.x, q.y + fd}, opt, &ev.contraction.phi);
            J[0][0] = (e1.contraction.c[0] - ev.contraction.c[0]) / fd;
            J[0][1] = (e2.contraction.c[0] - ev.contraction.c[0]) / fd;
            J[1][0] = (e1.contraction.c[1] - ev.contraction.c[1]) / fd;
            J[1][1] = (e2.contraction.c[1] - ev.contraction.c[1]) / fd;
            have_jacobian = true;
            jacobian_age = 0;
        }
        ++jacobian_age;
        const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        const double frob = std::sqrt(sq(J[0][0]) + sq(J[0][1]) + sq(J[1][0]) + sq(J[1][1]));
        if (std::abs(det) < sq(frob) / opt.jac_cond_limit) {
            out.jacobian_singular = true;
            throw QAdjustDivergedError("adjust_q: finite-difference Jacobian is singular");
        }
        double dq1 = -(J[1][1] * ev.contraction.c[0] - J[0][1] * ev.contraction.c[1]) / det;
        double dq2 = -(J[0][0] * ev.contraction.c[1] - J[1][0] * ev.contraction.c[0]) / det;
        const double dn = std::sqrt(dq1 * dq1 + dq2 * dq2);
        if (dn > 0.5 * t) { // keep steps inside the trust region
            dq1 *= 0.5 * t / dn;
            dq2 *= 0.5 * t / dn;
        }
        q = {q.x + dq1, q.y + dq2};
        if (norm(q) >= qmax)
            throw QAdjustDivergedError("adjust_q: iterate left B_{t |ln t|}(0)");
        ev = eval_at_q(ctx, q, opt, &ev.contraction.phi);
        out.c_history.push_back(std::max(std::abs(ev.contraction.c[0]), std::abs(ev.contraction.c[1])));
    }
    throw QAdjustDivergedError("adjust_q: no convergence in " + std::to_string(opt.max_outer) +
                               " outer iterations");
}

KernelMassDiagnostics kernel_mass_diagnostics(const ProblemCtx& ctx, const ReductionFrame& fr,
                                              const PeriodicField& phi) {
    const BubbleParams& bp = fr.params;
    const Grid g = phi.grid;
    const int n = g.n;
    const Vec2 tq = ctx.tq(bp.q);
    const double rc = bp.t * bp.R0;
    const double cell = 1.0 / double(g.size());
    const double mean_D_phi = inner(fr.density.normalized, phi);
    const PeriodicField lap_phi = laplacian(phi);
    const double L2 = sq(bp.Lambda);

    KernelMassDiagnostics kd;
    kd.log_t_factor = std::abs(std::log(bp.t));
    // dz = Lambda^2 dx; psi = phibar - <phi>_D; Delta_z psi = Lambda^{-2} Delta_x phi
    kd.m0 = par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        return (torus_dist(g.node(i, j), tq) < rc) ? lap_phi[k] : 0.0;
    }) * cell;
    kd.m1 = par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const double d = torus_dist(g.node(i, j), tq);
        if (d >= rc) return 0.0;
        const double z2 = L2 * d * d;
        return (phi[k] - mean_D_phi) / sq(1.0 + z2) * L2;
    }) * cell;
    kd.m2 = par::block_sum(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const double d = torus_dist(g.node(i, j), tq);
        if (d >= rc) return 0.0;
        const double z2 = L2 * d * d;
        return 16.0 * (phi[k] - mean_D_phi) * fr.chi[k] * (1.0 - z2) / (sq(1.0 + z2) * (1.0 + z2)) *
               L2;
    }) * cell;
    return kd;
}

} // namespace mfb

#include "mfb/bubble_ansatz.hpp"

#include <cmath>

#include "mfb/errors.hpp"
#include "mfb/par.hpp"
#include "mfb/quadrature.hpp"

namespace mfb {
namespace {
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;
} // namespace

double ProblemCtx::log_mass_const() const {
    return std::log(rho / (rho - 8.0 * kPi) * base.int_h_ew);
}

double H_value(const ProblemCtx& ctx, Vec2 q, Vec2 y) {
    const double t = ctx.t();
    const Vec2 ty{t * y.x, t * y.y};
    const Vec2 tq = ctx.tq(q);
    const Vec2 sp = ctx.pair.pair().source_plus();
    const Vec2 sm = ctx.pair.pair().source_minus();
    const double dp = torus_dist(ty, sp) / t;
    const double dm = torus_dist(ty, sm) / t;
    const double expo = -ctx.pair.regular_at(ty) +
                        8.0 * kPi * (ctx.greens.regular_at(ty, tq) - ctx.greens.robin()) +
                        ctx.w_at(ty) - ctx.w_at(tq);
    return ctx.h_at(ty) * dp * dp * dm * dm * std::exp(expo);
}

Vec2 H_gradient(const ProblemCtx& ctx, Vec2 q, Vec2 y) {
    const double h = 1e-6;
    const double gx = (H_value(ctx, q, {y.x + h, y.y}) - H_value(ctx, q, {y.x - h, y.y})) / (2 * h);
    const double gy = (H_value(ctx, q, {y.x, y.y + h}) - H_value(ctx, q, {y.x, y.y - h})) / (2 * h);
    return {gx, gy};
}

BubbleParams derive_params(const ProblemCtx& ctx, Vec2 q) {
    if (norm(q) >= ctx.r0) throw ConfigError("bubble location q must lie in B_r0(0)");
    BubbleParams bp;
    bp.t = ctx.t();
    bp.q = q;
    bp.R0 = ctx.R0;
    bp.H_q = H_value(ctx, q, q);
    if (!(bp.H_q > 0.0)) throw SolverError("H_{t,q}(q) must be positive");
    bp.w_tq = ctx.w_at(ctx.tq(q));
    bp.R_qq = ctx.greens.robin();
    bp.mass_log = ctx.log_mass_const();

    const double t = bp.t;
    bp.lambda = -2.0 * std::log(t) - 2.0 * std::log(ctx.rho * bp.H_q / 8.0) -
                8.0 * kPi * bp.R_qq - bp.w_tq + bp.mass_log;
    bp.C = std::sqrt(8.0 / (ctx.rho * bp.H_q));
    const double half = std::exp(0.5 * bp.lambda) / bp.C;
    bp.Lambda = half / t;
    bp.Gamma = half * ctx.R0;
    bp.theta = 1.0 / (1.0 + bp.Gamma * bp.Gamma);
    bp.Bconst = -4.0 * std::log(t * ctx.R0) * bp.theta +
                2.0 * std::log(bp.Gamma * bp.Gamma / (1.0 + bp.Gamma * bp.Gamma));
    return bp;
}

namespace {

// Both branches without the w(x) term (it is common to the two pieces).
double inner_branch_no_w(const ProblemCtx& ctx, const BubbleParams& bp, double r, double R_x_tq) {
    return bp.lambda - 6.0 * std::log(bp.t) - 2.0 * std::log1p(bp.Lambda * bp.Lambda * r * r) +
           8.0 * kPi * R_x_tq * (1.0 - bp.theta) - 8.0 * kPi * bp.R_qq - bp.w_tq + bp.mass_log;
}

double outer_branch_no_w(const ProblemCtx& ctx, const BubbleParams& bp, double G_x_tq) {
    return bp.lambda - 6.0 * std::log(bp.t) - 2.0 * std::log1p(bp.Gamma * bp.Gamma) +
           8.0 * kPi * (G_x_tq + std::log(bp.t * bp.R0) / kTwoPi) * (1.0 - bp.theta) -
           8.0 * kPi * bp.R_qq - bp.w_tq + bp.mass_log;
}

} // namespace

double ustar_at(const ProblemCtx& ctx, const BubbleParams& bp, Vec2 x) {
    const Vec2 tq = ctx.tq(bp.q);
    const double r = torus_dist(x, tq);
    const double w_x = ctx.w_at(x);
    if (r < bp.t * bp.R0)
        return inner_branch_no_w(ctx, bp, r, ctx.greens.regular_at(x, tq)) + w_x;
    return outer_branch_no_w(ctx, bp, ctx.greens.green_at(x, tq)) + w_x;
}

Ansatz assemble_ansatz(const ProblemCtx& ctx, const BubbleParams& bp) {
    const Grid g = ctx.h.grid;
    const int n = g.n;
    if (1.0 / bp.Lambda < 8.0 / n)
        throw UnderResolvedError("bubble core width 1/Lambda = " + std::to_string(1.0 / bp.Lambda) +
                                 " under-resolved on n = " + std::to_string(n));

    Ansatz a;
    a.params = bp;
    const Vec2 tq = ctx.tq(bp.q);
    const PeriodicField& Gq = ctx.greens.field(tq); // continuum-normalized samples

    a.ustar = PeriodicField(g);
    const double rc = bp.t * bp.R0;
    par::for_each(a.ustar.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const Vec2 x = g.node(i, j);
        const double r = torus_dist(x, tq);
        double val;
        if (r < rc) {
            const double R_x = (r < 1e-13) ? ctx.greens.robin() : Gq[k] + std::log(r) / kTwoPi;
            val = inner_branch_no_w(ctx, bp, r, R_x);
        } else {
            val = outer_branch_no_w(ctx, bp, Gq[k]);
        }
        a.ustar[k] = val + ctx.base.w[k];
    });

    a.U = a.ustar;
    a.mean_ustar = project_mean_zero(a.U);

    // Interface jumps, sampled on the circle |x - tq| = t R0.  The w terms
    // are common to the branches and drop out of both measurements.
    const int n_angles = 16;
    const double h_fd = rc * 1e-6;
    double jump0 = 0.0, jump1 = 0.0;
    for (int m = 0; m < n_angles; ++m) {
        const double phi = kTwoPi * m / n_angles;
        const Vec2 dir{std::cos(phi), std::sin(phi)};
        auto at_radius = [&](double r, bool inner) {
            const Vec2 x{tq.x + r * dir.x, tq.y + r * dir.y};
            return inner ? inner_branch_no_w(ctx, bp, r, ctx.greens.regular_at(x, tq))
                         : outer_branch_no_w(ctx, bp, ctx.greens.green_at(x, tq));
        };
        jump0 = std::max(jump0, std::abs(at_radius(rc, true) - at_radius(rc, false)));
        const double slope_in = (at_radius(rc + h_fd, true) - at_radius(rc - h_fd, true)) / (2 * h_fd);
        const double slope_out =
            (at_radius(rc + h_fd, false) - at_radius(rc - h_fd, false)) / (2 * h_fd);
        jump1 = std::max(jump1, std::abs(slope_in - slope_out));
    }
    a.interface_jump_c0 = jump0;
    a.interface_jump_c1 = jump1;
    return a;
}

double ustar_mean_radial(const BubbleParams& bp) {
    // int u* = B + 2 pi int_0^{tR0} [ 2 ln(L^2 r^2/(1+L^2 r^2)) - 4 theta ln r - B ] r dr
    const double rc = bp.t * bp.R0;
    auto f = [&](double r) {
        const double zz = bp.Lambda * bp.Lambda * r * r;
        return 2.0 * kPi * r *
               (2.0 * std::log(zz / (1.0 + zz)) - 4.0 * bp.theta * std::log(r) - bp.Bconst);
    };
    const QuadResult q = integrate_adaptive(f, 0.0, rc, 1e-14);
    return bp.Bconst + q.value;
}

Density assemble_density(const ProblemCtx& ctx, const PeriodicField& U, const PeriodicField* phi) {
    const Grid g = U.grid;
    Density d;
    d.normalized = PeriodicField(g);
    const PeriodicField& wgt = ctx.pair.weight();
    par::for_each(d.normalized.size(), [&](std::ptrdiff_t k) {
        const double expo = U[k] + (phi ? (*phi)[k] : 0.0);
        d.normalized[k] = ctx.h[k] * std::exp(expo) * wgt[k];
    });
    d.total = integrate(d.normalized);
    scale(d.normalized, 1.0 / d.total);
    return d;
}

MassSplit ansatz_mass_split(const ProblemCtx& ctx, const Ansatz& ansatz) {
    const Grid g = ansatz.U.grid;
    const int n = g.n;
    const Density dens = assemble_density(ctx, ansatz.U);
    const Vec2 tq = ctx.tq(ansatz.params.q);
    const double rc = ansatz.params.t * ansatz.params.R0;

    MassSplit ms;
    ms.inner_mass = ctx.rho * par::block_sum(dens.normalized.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        return (torus_dist(g.node(i, j), tq) < rc) ? dens.normalized[k] : 0.0;
    }) / double(g.size());

    // continuum-normalized total mass: undo the pair shift and the mean of u*
    ms.total_mass = dens.total * std::exp(ansatz.mean_ustar - ctx.pair.shift());
    ms.Aconst = ms.total_mass / (ctx.rho / (ctx.rho - 8.0 * kPi) * ctx.base.int_h_ew) - 1.0;

    // sup over M \ B_{2 t R0}(tq) of |density - (1 - 8pi/rho) h e^w / int h e^w|
    const double base_total = ctx.base.int_h_ew;
    const std::ptrdiff_t kmax = par::argmax(dens.normalized.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        if (torus_dist(g.node(i, j), tq) <= 2.0 * rc) return -1.0;
        const double ref =
            (1.0 - 8.0 * kPi / ctx.rho) * ctx.h[k] * std::exp(ctx.base.w[k]) / base_total;
        return std::abs(dens.normalized[k] - ref);
    });
    {
        const int i = int(kmax / n), j = int(kmax % n);
        const double ref = (1.0 - 8.0 * kPi / ctx.rho) * ctx.h[size_t(kmax)] *
                           std::exp(ctx.base.w[size_t(kmax)]) / base_total;
        ms.outer_density_err = (torus_dist(g.node(i, j), tq) <= 2.0 * rc)
                                   ? 0.0
                                   : std::abs(dens.normalized[size_t(kmax)] - ref);
    }
    return ms;
}

} // namespace mfb

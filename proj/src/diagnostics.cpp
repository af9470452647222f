#include "mfb/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mfb/errors.hpp"
#include "mfb/par.hpp"

namespace mfb {
namespace {
constexpr double kPi = 3.14159265358979323846264338328;

double sq(double x) { return x * x; }

double ball_mass_fraction(const PeriodicField& dens_norm, Vec2 center, double r) {
    const Grid g = dens_norm.grid;
    const int n = g.n;
    return par::block_sum(dens_norm.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        return (torus_dist(g.node(i, j), center) < r) ? dens_norm[k] : 0.0;
    }) / double(g.size());
}

} // namespace

double local_mass(const ProblemCtx& ctx, const PeriodicField& u, Vec2 q, double r) {
    if (!(r < ctx.r0)) throw ConfigError("local_mass: radius must be below r0");
    const Density dens = assemble_density(ctx, u);
    return ctx.rho * ball_mass_fraction(dens.normalized, ctx.tq(q), r);
}

PohozaevCheck pohozaev_check(const ProblemCtx& ctx, const PeriodicField& u,
                             const BubbleParams& bp) {
    PohozaevCheck pc;
    const double t = bp.t;
    const double r_sigma = std::min(std::sqrt(t), 0.99 * ctx.r0);
    const Density dens = assemble_density(ctx, u);
    pc.sigma0 = ctx.rho * ball_mass_fraction(dens.normalized, ctx.tq(bp.q), r_sigma);
    // m0: the rescaled-density mass over the scaled ball |z| <= Gamma/2,
    // i.e. an x-ball of radius t R0 / 2 about the collapse point
    pc.m0 = ctx.rho * ball_mass_fraction(dens.normalized, {0.0, 0.0}, 0.5 * t * bp.R0);
    pc.residual = (pc.sigma0 - pc.m0) * (pc.sigma0 + pc.m0) - 24.0 * kPi * (pc.sigma0 - pc.m0);
    return pc;
}

ProfileFit profile_fit(const ProblemCtx& ctx, const PeriodicField& u, const BubbleParams& bp,
                       double eps) {
    const Grid g = u.grid;
    const int n = g.n;
    const double t = bp.t;

    const Density dens = assemble_density(ctx, u);
    const double log_total = std::log(dens.total) - ctx.pair.shift(); // continuum normalization

    // vbar(x) = u(x) - w(x) + 6 ln t - ln int h e^{u - G_t2}; maximize over |x| < t r0
    PeriodicField umw(g);
    par::for_each(umw.size(), [&](std::ptrdiff_t k) { umw[k] = u[k] - ctx.base.w[k]; });
    const double r_cap = t * ctx.r0;
    const std::ptrdiff_t kbest = par::argmax(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        return (torus_dist(g.node(i, j), {0.0, 0.0}) < r_cap) ? umw[k] : -1e300;
    });

    // sub-grid refinement on the trig interpolant
    Interpolator itp(umw);
    Vec2 x_star = g.node(int(kbest / n), int(kbest % n));
    const double hfd = 0.25 / n;
    for (int it = 0; it < 8; ++it) {
        const double f0 = itp(x_star);
        const double fx1 = itp({x_star.x + hfd, x_star.y}), fx0 = itp({x_star.x - hfd, x_star.y});
        const double fy1 = itp({x_star.x, x_star.y + hfd}), fy0 = itp({x_star.x, x_star.y - hfd});
        const double gx = (fx1 - fx0) / (2 * hfd), gy = (fy1 - fy0) / (2 * hfd);
        const double hxx = (fx1 - 2 * f0 + fx0) / sq(hfd), hyy = (fy1 - 2 * f0 + fy0) / sq(hfd);
        const double fpp = itp({x_star.x + hfd, x_star.y + hfd});
        const double fpm = itp({x_star.x + hfd, x_star.y - hfd});
        const double fmp = itp({x_star.x - hfd, x_star.y + hfd});
        const double fmm = itp({x_star.x - hfd, x_star.y - hfd});
        const double hxy = (fpp - fpm - fmp + fmm) / (4 * sq(hfd));
        const double det = hxx * hyy - hxy * hxy;
        if (det == 0.0) break;
        const double dx = -(hyy * gx - hxy * gy) / det;
        const double dy = -(hxx * gy - hxy * gx) / det;
        const double step = std::hypot(dx, dy);
        const double cap = 2.0 / n;
        const double sc = step > cap ? cap / step : 1.0;
        x_star = {x_star.x + sc * dx, x_star.y + sc * dy};
        if (step < 1e-13) break;
    }

    ProfileFit pf;
    const Vec2 x_off = torus_offset(x_star, {0.0, 0.0});
    pf.p_t = {x_off.x / t, x_off.y / t};
    if (norm(pf.p_t) > 0.5 * ctx.r0 / t)
        throw SolverError("profile_fit: maximum left the core region");
    pf.lambda_meas = itp(x_star) + 6.0 * std::log(t) - log_total;

    // standard-bubble comparison constants at the measured peak
    const Vec2 tp{t * pf.p_t.x, t * pf.p_t.y};
    const double dp = torus_dist(tp, ctx.pair.pair().source_plus()) / t;
    const double dm = torus_dist(tp, ctx.pair.pair().source_minus()) / t;
    const double C_t = ctx.rho * ctx.h_at(tp) * std::exp(ctx.w_at(tp)) * sq(dp) * sq(dm) *
                       std::exp(-ctx.pair.regular_at(tp)) / 8.0;
    pf.prop2e_combo = pf.lambda_meas + 2.0 * std::log(t) + 2.0 * std::log(C_t) +
                      8.0 * kPi * ctx.greens.robin() - ctx.log_mass_const();

    const double rho_t = local_mass(ctx, u, bp.q, t * bp.R0);
    // q_t solves grad I_t(p_t) = -t rho_t grad_x R(tp, tp); on the torus the
    // gradient of the regular part at coincidence vanishes, kept general here
    const Vec2 gradR = ctx.greens.regular_grad_x(tp, tp);
    Vec2 q_t = pf.p_t;
    const double cel = C_t * std::exp(pf.lambda_meas);
    for (int it = 0; it < 3; ++it) {
        const double d2 = sq(pf.p_t.x - q_t.x) + sq(pf.p_t.y - q_t.y);
        const double pref = (1.0 + cel * d2) / (4.0 * cel);
        q_t = {pf.p_t.x + t * rho_t * gradR.x * pref, pf.p_t.y + t * rho_t * gradR.y * pref};
    }

    // eta(y) = vbar(y) - I_t(y) - rho_t (R(ty,tp) - R(tp,tp)), scanned over
    // grid nodes with |z| <= Gamma/2, z = R_t (y - p_t)
    const double R_t = std::sqrt(C_t) * std::exp(0.5 * pf.lambda_meas);
    const double z_cap = 0.5 * bp.Gamma;
    const double x_rad = std::min(z_cap / R_t * t, 0.45);
    const double robin = ctx.greens.robin();
    const std::ptrdiff_t kmax = par::argmax(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const Vec2 x = g.node(i, j);
        const Vec2 off = torus_offset(x, tp);
        if (norm(off) > x_rad) return -1e300;
        const Vec2 y{tp.x / t + off.x / t, tp.y / t + off.y / t};
        const Vec2 z{R_t * (y.x - pf.p_t.x), R_t * (y.y - pf.p_t.y)};
        const double zn = norm(z);
        if (zn > z_cap) return -1e300;
        const double vbar = umw[k] + 6.0 * std::log(t) - log_total;
        const double d2q = sq(y.x - q_t.x) + sq(y.y - q_t.y);
        const double I_t = pf.lambda_meas - 2.0 * std::log1p(cel * d2q);
        const double eta = vbar - I_t - rho_t * (ctx.greens.regular_at(x, tp) - robin);
        return std::abs(eta) / std::pow(1.0 + zn, eps);
    });
    {
        const int i = int(kmax / n), j = int(kmax % n);
        const Vec2 x = g.node(i, j);
        const Vec2 off = torus_offset(x, tp);
        const Vec2 y{tp.x / t + off.x / t, tp.y / t + off.y / t};
        const Vec2 z{R_t * (y.x - pf.p_t.x), R_t * (y.y - pf.p_t.y)};
        const double vbar = umw[size_t(kmax)] + 6.0 * std::log(t) - log_total;
        const double d2q = sq(y.x - q_t.x) + sq(y.y - q_t.y);
        const double I_t = pf.lambda_meas - 2.0 * std::log1p(cel * d2q);
        const double eta = vbar - I_t - rho_t * (ctx.greens.regular_at(x, tp) - robin);
        pf.eta_max_weighted = std::abs(eta) / std::pow(1.0 + norm(z), eps);
    }
    return pf;
}

double outer_error(const ProblemCtx& ctx, const PeriodicField& u, Vec2 q_star, double R0) {
    const Grid g = u.grid;
    const int n = g.n;
    const Vec2 tq = ctx.tq(q_star);
    const double rc = 2.0 * ctx.t() * R0;
    const PeriodicField& Gq = ctx.greens.field(tq);
    const std::ptrdiff_t kmax = par::argmax(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        if (torus_dist(g.node(i, j), tq) <= rc) return -1e300;
        return std::abs(u[k] - ctx.base.w[k] - 8.0 * kPi * Gq[k]);
    });
    return std::abs(u[size_t(kmax)] - ctx.base.w[size_t(kmax)] - 8.0 * kPi * Gq[size_t(kmax)]);
}

SolveRun::SolveRun(const ProblemConfig& cfg, double t, int n)
    : grid(make_grid(n)),
      greens(grid),
      wspec(cfg.weight),
      h(assemble_h(wspec, greens)),
      base(solve_base(cfg.rho, h,
                      PeriodicField(grid),
                      NewtonOptions{cfg.newton_tol, cfg.max_newton, 1e-13, 400},
                      /*compute_margin=*/true)),
      cpair(make_collapse_pair(t, cfg.e_dir, cfg.r0)),
      pair(greens, cpair),
      w_interp(base.w),
      ctx{greens, wspec, h, base, pair, w_interp, cfg.rho, cfg.R0, cfg.r0} {
    if (base.margin <= cfg.margin_tol)
        throw SolverError("base solution numerically degenerate: margin " +
                          std::to_string(base.margin));

    AdjustOptions aopt;
    aopt.c_tol = cfg.c_tol;
    aopt.max_outer = cfg.max_outer;
    {
        // |c| must be small enough that the multiplier remainder c Z stays
        // inside the final residual budget; ||Z||_inf ~ 4 Lambda^2
        const BubbleParams bp0 = derive_params(ctx, cfg.q0);
        aopt.c_tol = std::min(cfg.c_tol, 2.5e-8 / (8.0 * bp0.Lambda * bp0.Lambda));
    }
    aopt.norms = NormParams{cfg.p, cfg.alpha};
    aopt.contraction.fp_tol = cfg.fp_tol;
    aopt.contraction.max_fp_iter = cfg.max_fp_iter;
    aopt.contraction.linear.lin_tol = cfg.lin_tol;
    adjusted = adjust_q(ctx, cfg.q0, aopt);

    u = adjusted.ansatz.U;
    axpy(u, 1.0, adjusted.contraction.phi);
    report.mean_u = integrate(u);

    report.t = t;
    report.grid_n = n;
    report.q_star = adjusted.q_star;
    report.lambda_tq = adjusted.params.lambda;
    report.lambda_pred = adjusted.params.lambda - adjusted.params.w_tq;
    report.c1 = adjusted.contraction.c[0];
    report.c2 = adjusted.contraction.c[1];
    report.phi_sup = adjusted.contraction.sup_norm;
    report.phi_x_norm = adjusted.contraction.x_norm;
    report.ball_radius = adjusted.contraction.ball_radius;
    report.bound_ratio = adjusted.contraction.bound_ratio;
    report.contraction_iters = adjusted.contraction.iterations;
    report.contraction_factor = adjusted.contraction.contraction_factors.empty()
                                    ? 0.0
                                    : adjusted.contraction.contraction_factors.back();
    report.adjust_iters = adjusted.outer_iters;
    report.mean_ustar = adjusted.ansatz.mean_ustar;
    report.interface_jump_c0 = adjusted.ansatz.interface_jump_c0;
    report.interface_jump_c1 = adjusted.ansatz.interface_jump_c1;
    report.margin = base.margin;

    const PeriodicField eq_res = equation_residual(ctx, adjusted.ansatz, adjusted.frame,
                                                   adjusted.contraction.phi);
    report.residual = max_abs(eq_res);

    const MassSplit ms = ansatz_mass_split(ctx, adjusted.ansatz);
    report.inner_mass = ms.inner_mass;
    report.aconst = ms.Aconst;

    {
        // Lemma 3.1(ii) deviation of the bare ansatz
        const Vec2 tq = ctx.tq(adjusted.q_star);
        const PeriodicField& Gq = greens.field(tq);
        const int nn = grid.n;
        const PeriodicField& U = adjusted.ansatz.U;
        const std::ptrdiff_t kw = par::argmax(U.size(), [&](std::ptrdiff_t k) {
            const int i = int(k / nn), j = int(k % nn);
            if (torus_dist(grid.node(i, j), tq) <= t * cfg.R0) return -1e300;
            return std::abs(U[k] - base.w[k] - 8.0 * kPi * Gq[k]);
        });
        report.ansatz_outer_dev =
            std::abs(U[size_t(kw)] - base.w[size_t(kw)] - 8.0 * kPi * Gq[size_t(kw)]);
    }

    report.rho_t = local_mass(ctx, u, adjusted.q_star, t * cfg.R0);
    const PohozaevCheck pc = pohozaev_check(ctx, u, adjusted.params);
    report.sigma0 = pc.sigma0;
    report.m0 = pc.m0;
    report.pohozaev_residual = pc.residual;
    report.outer_err = outer_error(ctx, u, adjusted.q_star, cfg.R0);

    const ProfileFit pf = profile_fit(ctx, u, adjusted.params, cfg.eps);
    report.lambda_meas = pf.lambda_meas;
    report.eta_max_weighted = pf.eta_max_weighted;

    const KernelMassDiagnostics km =
        kernel_mass_diagnostics(ctx, adjusted.frame, adjusted.contraction.phi);
    report.km_m0 = km.m0;
    report.km_m1 = km.m1;
    report.km_m2 = km.m2;

    // local mass vs radius
    const double r_lo = 0.5 * t * cfg.R0, r_hi = 0.9 * cfg.r0;
    for (int i = 0; i < 12; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, i / 11.0);
        report.sigma0_curve_r.push_back(r);
        report.sigma0_curve.push_back(local_mass(ctx, u, adjusted.q_star, r));
    }
}

std::unique_ptr<SolveRun> solve_single(const ProblemConfig& cfg, double t, int n) {
    return std::make_unique<SolveRun>(cfg, t, n);
}

int choose_grid(const ProblemConfig& cfg, double t) {
    if (cfg.grid_n > 0) return cfg.grid_n;
    // pilot estimate of Lambda on a coarse grid
    const Grid g = make_grid(256);
    Greens greens(g);
    const PeriodicField h = assemble_h(cfg.weight, greens);
    const BaseState base = solve_base(cfg.rho, h, PeriodicField(g),
                                      NewtonOptions{1e-10, cfg.max_newton, 1e-12, 300},
                                      /*compute_margin=*/false);
    const CollapsePair cp = make_collapse_pair(t, cfg.e_dir, cfg.r0);
    const CollapseFields pair(greens, cp);
    const Interpolator w_itp(base.w);
    const ProblemCtx ctx{greens, cfg.weight, h, base, pair, w_itp, cfg.rho, cfg.R0, cfg.r0};
    const BubbleParams bp = derive_params(ctx, cfg.q0);

    int n = cfg.grid_min;
    while (n < cfg.grid_factor * bp.Lambda && n < cfg.grid_max) n *= 2;
    if (8.0 * bp.Lambda > n)
        throw UnderResolvedError("t = " + std::to_string(t) + " needs n >= " +
                                 std::to_string(8.0 * bp.Lambda) + " which exceeds grid_max");
    return n;
}

FitResult fit_exponent(const std::vector<double>& ts, const std::vector<double>& values) {
    if (ts.size() != values.size() || ts.size() < 3)
        throw SolverError("fit_exponent: need at least 3 points");
    std::vector<double> xs, ys;
    for (size_t i = 0; i < ts.size(); ++i) {
        if (!(values[i] > 0.0)) throw SolverError("fit_exponent: values must be positive");
        xs.push_back(std::log(ts[i]));
        ys.push_back(std::log(values[i]));
    }
    const size_t m = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    FitResult fr;
    fr.exponent = (m * sxy - sx * sy) / denom;
    fr.offset = (sy - fr.exponent * sx) / m;
    double ss = 0.0;
    for (size_t i = 0; i < m; ++i) ss += sq(ys[i] - fr.offset - fr.exponent * xs[i]);
    const double var = (m > 2) ? ss / double(m - 2) : 0.0;
    fr.half_width = 2.0 * std::sqrt(var * m / denom);
    return fr;
}

SweepResult run_sweep(const ProblemConfig& cfg) {
    SweepResult sw;
    sw.ts = cfg.t_list;
    std::sort(sw.ts.begin(), sw.ts.end(), std::greater<double>());
    if (sw.ts.size() < 3) throw ConfigError("sweep needs at least 3 t values");

    for (double t : sw.ts) {
        try {
            const int n = choose_grid(cfg, t);
            sw.grids.push_back(n);
            auto run = solve_single(cfg, t, n);
            sw.reports.push_back(run->report);
            sw.failures.emplace_back();
        } catch (const std::exception& e) {
            if (sw.grids.size() < sw.failures.size() + 1) sw.grids.push_back(0);
            sw.failures.emplace_back(e.what());
        }
    }

    std::vector<double> ts_ok, v1, v2, v3, v4;
    size_t ri = 0;
    for (size_t i = 0; i < sw.ts.size(); ++i) {
        if (!sw.failures[i].empty()) continue;
        const SolveReport& r = sw.reports[ri++];
        const double logt = std::abs(std::log(r.t));
        ts_ok.push_back(r.t);
        v1.push_back(std::abs(r.mean_ustar) / logt);
        v2.push_back(std::abs(r.rho_t - 8.0 * kPi) / logt);
        v3.push_back(r.outer_err);
        v4.push_back(std::abs(r.lambda_meas - r.lambda_pred));
    }
    if (ts_ok.size() < 3)
        throw SolverError("sweep: fewer than 3 successful points, refusing to fit");
    sw.fit_mean_ustar = fit_exponent(ts_ok, v1);
    sw.fit_rho_t = fit_exponent(ts_ok, v2);
    sw.fit_outer = fit_exponent(ts_ok, v3);
    sw.fit_lambda_gap = fit_exponent(ts_ok, v4);
    return sw;
}

} // namespace mfb

#include "mfb/base_state.hpp"

#include <cmath>

#include "mfb/errors.hpp"
#include "mfb/linsolve.hpp"
#include "mfb/par.hpp"
#include "mfb/spectral.hpp"

namespace mfb {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;

PeriodicField to_field(const FlatVec& v, Grid g) {
    PeriodicField f(g);
    f.v = v;
    return f;
}

// k (phi - int k phi) with k the normalized density (int k = 1 discretely).
PeriodicField potential_term(const PeriodicField& phi, const PeriodicField& k) {
    const double mean_k_phi = inner(k, phi);
    PeriodicField out(phi.grid);
    par::for_each(out.size(), [&](std::ptrdiff_t i) { out[i] = k[i] * (phi[i] - mean_k_phi); });
    return out;
}

PeriodicField normalized_density(const PeriodicField& w, const PeriodicField& h) {
    PeriodicField e(w.grid);
    par::for_each(e.size(), [&](std::ptrdiff_t i) { e[i] = h[i] * std::exp(w[i]); });
    const double total = integrate(e);
    scale(e, 1.0 / total);
    return e;
}

} // namespace

double WeightSpec::hstar_at(Vec2 x) const {
    constexpr double kTwoPi = 2.0 * kPi;
    switch (kind) {
        case Kind::Constant: return c0;
        case Kind::ExpCos: return std::exp(c1 * std::cos(kTwoPi * x.x) + c2 * std::cos(kTwoPi * x.y));
    }
    return 1.0;
}

double weight_h_at(const WeightSpec& spec, const Greens& greens, Vec2 x) {
    double h = spec.hstar_at(x);
    for (const Vortex& v : spec.vortices) {
        const double d = torus_dist(x, v.q);
        h *= std::pow(d * d, v.alpha) * std::exp(-4.0 * kPi * v.alpha * greens.regular_at(x, v.q));
    }
    return h;
}

PeriodicField assemble_h(const WeightSpec& spec, const Greens& greens) {
    if (spec.hstar_at({0, 0}) <= 0.0) throw ConfigError("h_* must be positive");
    for (const Vortex& v : spec.vortices) {
        if (v.alpha < 1) throw ConfigError("vortex strength must be a positive integer");
        if (torus_dist(v.q, {0.0, 0.0}) < 1e-12)
            throw ConfigError("extra vortex at the origin is not allowed");
    }
    const Grid g = greens.grid;
    const int n = g.n;
    PeriodicField h(g);
    par::for_each(h.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        h[k] = weight_h_at(spec, greens, g.node(i, j));
    });
    return h;
}

PeriodicField apply_base_jacobian(const PeriodicField& phi, const PeriodicField& w,
                                  const PeriodicField& h, double rho) {
    const PeriodicField k = normalized_density(w, h);
    PeriodicField out = laplacian(phi);
    const PeriodicField pot = potential_term(phi, k);
    axpy(out, rho - 8.0 * kPi, pot);
    return out;
}

BaseState solve_base(double rho, const PeriodicField& h, const PeriodicField& w0,
                     const NewtonOptions& opt, bool compute_margin) {
    const double ratio = rho / (8.0 * kPi);
    if (std::abs(ratio - std::round(ratio)) * 8.0 * kPi < 1e-9)
        throw RhoForbiddenError("rho must avoid 8 pi N");
    if (rho <= 8.0 * kPi) throw ConfigError("rho must exceed 8 pi");

    const Grid g = h.grid;
    BaseState st;
    st.rho = rho;
    st.w = w0;
    project_mean_zero(st.w);

    auto residual_of = [&](const PeriodicField& w) {
        PeriodicField k = normalized_density(w, h);
        PeriodicField F = laplacian(w);
        par::for_each(F.size(), [&](std::ptrdiff_t i) { F[i] += (rho - 8.0 * kPi) * (k[i] - 1.0); });
        return F;
    };

    PeriodicField F = residual_of(st.w);
    double res = max_abs(F);
    st.residual_history.push_back(res);

    // Spectral differentiation amplifies rounding by 4 pi^2 (n/2)^2, so the
    // achievable max-norm residual grows ~ n^2; converge at that floor when
    // the requested tolerance sits below it.
    auto rounding_floor = [&] {
        return 4e-15 * double(g.n) * g.n * std::max(0.1, max_abs(st.w));
    };

    int it = 0;
    for (; it < opt.max_iter && res >= std::max(opt.tol, rounding_floor()); ++it) {
        const PeriodicField k = normalized_density(st.w, h);
        ApplyFn apply = [&](const FlatVec& in, FlatVec& out) {
            PeriodicField phi = to_field(in, g);
            PeriodicField Jp = laplacian(phi);
            const PeriodicField pot = potential_term(phi, k);
            axpy(Jp, rho - 8.0 * kPi, pot);
            out = Jp.v;
        };
        ApplyFn precond = [&](const FlatVec& in, FlatVec& out) {
            PeriodicField r = to_field(in, g);
            project_mean_zero(r);
            PeriodicField u = solve_poisson_meanzero(r);
            scale(u, -1.0); // Delta^{-1}
            out = u.v;
        };
        FlatVec rhs = F.v;
        par::for_each(std::ptrdiff_t(rhs.size()), [&](std::ptrdiff_t i) { rhs[size_t(i)] = -rhs[size_t(i)]; });
        FlatVec delta(rhs.size(), 0.0);
        GmresOptions gopt;
        gopt.rel_tol = opt.lin_rel_tol;
        gopt.max_iter = opt.lin_max_iter;
        const GmresResult lin = gmres(apply, precond, rhs, delta, gopt);
        if (!lin.converged && lin.residual_norm > 1e-6)
            throw NoConvergenceError("base Newton: inner linear solve stalled");

        // damped update: halve the step while the residual grows
        double step = 1.0;
        PeriodicField w_next(g);
        double res_next = res;
        for (int half = 0; half < 12; ++half) {
            w_next = st.w;
            par::for_each(w_next.size(),
                          [&](std::ptrdiff_t i) { w_next[i] += step * delta[size_t(i)]; });
            project_mean_zero(w_next);
            PeriodicField F_next = residual_of(w_next);
            res_next = max_abs(F_next);
            if (res_next < res || res_next < opt.tol) {
                F = F_next;
                break;
            }
            step *= 0.5;
        }
        if (res_next >= res) {
            if (res < 20.0 * rounding_floor()) break; // stalled at rounding level
            throw NoConvergenceError("base Newton: no descent after damping");
        }
        st.w = w_next;
        res = res_next;
        st.residual_history.push_back(res);
    }
    if (res >= std::max(opt.tol, 20.0 * rounding_floor()))
        throw NoConvergenceError("base Newton: max iterations reached");

    st.newton_iters = it;
    st.residual = res;
    {
        PeriodicField e(g);
        par::for_each(e.size(), [&](std::ptrdiff_t i) { e[i] = h[i] * std::exp(st.w[i]); });
        st.int_h_ew = integrate(e);
    }
    st.margin = compute_margin ? nondegeneracy_margin(st.w, h, rho) : 0.0;
    return st;
}

double nondegeneracy_margin(const PeriodicField& w, const PeriodicField& h, double rho) {
    const Grid g = w.grid;
    const PeriodicField k = normalized_density(w, h);

    ApplyFn apply = [&](const FlatVec& in, FlatVec& out) {
        PeriodicField phi = to_field(in, g);
        PeriodicField Ap = laplacian(phi);
        const PeriodicField pot = potential_term(phi, k);
        axpy(Ap, rho - 8.0 * kPi, pot);
        out = Ap.v;
    };
    ApplyFn precond = [&](const FlatVec& in, FlatVec& out) {
        PeriodicField r = to_field(in, g);
        project_mean_zero(r);
        PeriodicField u = solve_poisson_meanzero(r);
        scale(u, -1.0);
        out = u.v;
    };

    // deterministic smooth start vector, mean zero
    PeriodicField x0 = sample(g, [](Vec2 x) {
        return std::sin(2.0 * kPi * x.x) + 0.7 * std::cos(2.0 * kPi * x.y) +
               0.3 * std::sin(4.0 * kPi * (x.x + x.y));
    });
    project_mean_zero(x0);
    FlatVec x = x0.v;
    {
        const double nx = flat_norm(x);
        par::for_each(std::ptrdiff_t(x.size()), [&](std::ptrdiff_t i) { x[size_t(i)] /= nx; });
    }

    double margin = 0.0, margin_prev = -1.0;
    for (int it = 0; it < 50; ++it) {
        FlatVec u(x.size(), 0.0);
        GmresOptions gopt;
        gopt.rel_tol = 1e-13;
        gopt.max_iter = 800;
        gmres(apply, precond, x, u, gopt);
        const double nu = flat_norm(u);
        if (!(nu > 0.0) || nu > 1e12) return 0.0; // numerically degenerate
        par::for_each(std::ptrdiff_t(u.size()), [&](std::ptrdiff_t i) { u[size_t(i)] /= nu; });
        // Rayleigh quotient |<u, A u>| / <u, u>
        FlatVec Au(u.size());
        apply(u, Au);
        margin = std::abs(flat_dot(u, Au) / flat_dot(u, u));
        x = u;
        if (margin_prev >= 0.0 && std::abs(margin - margin_prev) <= 1e-8 * margin) break;
        margin_prev = margin;
    }
    return margin;
}

} // namespace mfb

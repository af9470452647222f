// Weight assembly and the base mean-field solve: exact constant solution,
// Newton convergence on a smooth weight, the analytic non-degeneracy margin,
// and the linearization consistency checks.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfb/base_state.hpp"
#include "mfb/errors.hpp"
#include "mfb/spectral.hpp"

using namespace mfb;

namespace {
constexpr double kPi = M_PI;

PeriodicField base_residual(const PeriodicField& w, const PeriodicField& h, double rho) {
    PeriodicField e(w.grid);
    par::for_each(e.size(), [&](std::ptrdiff_t k) { e[k] = h[k] * std::exp(w[k]); });
    const double total = integrate(e);
    PeriodicField F = laplacian(w);
    par::for_each(F.size(), [&](std::ptrdiff_t k) { F[k] += (rho - 8 * kPi) * (e[k] / total - 1.0); });
    return F;
}
} // namespace

TEST_CASE("assemble_h") {
    const Grid g = make_grid(128);
    Greens greens(g);

    WeightSpec flat; // constant 1, no vortices
    const PeriodicField h1 = assemble_h(flat, greens);
    CHECK(max_abs(h1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integrate(h1) == doctest::Approx(1.0).epsilon(1e-15));

    WeightSpec with_vortex = flat;
    with_vortex.vortices.push_back({{0.5, 0.5}, 1});
    const PeriodicField h2 = assemble_h(with_vortex, greens);
    CHECK(h2.at(64, 64) == 0.0); // zero exactly at the vortex node
    int positive = 0;
    for (int k = 0; k < 50; ++k) {
        const int i = (k * 37 + 1) % 128, j = (k * 59 + 7) % 128;
        if (i == 64 && j == 64) continue;
        REQUIRE(h2.at(i, j) > 0.0);
        ++positive;
    }
    CHECK(positive >= 49);

    // h(0) > 0 across assorted specs
    unsigned state = 31u;
    for (int s = 0; s < 10; ++s) {
        auto next = [&] {
            state = state * 1664525u + 1013904223u;
            return double(state >> 8) / double(1u << 24);
        };
        WeightSpec ws;
        ws.kind = WeightSpec::Kind::ExpCos;
        ws.c1 = next() - 0.5;
        ws.c2 = next() - 0.5;
        ws.vortices.push_back({{0.25 + 0.5 * next(), 0.25 + 0.5 * next()}, 1 + int(next() * 2)});
        REQUIRE(weight_h_at(ws, greens, {0.0, 0.0}) > 0.0);
    }

    WeightSpec bad = flat;
    bad.vortices.push_back({{0.0, 0.0}, 1});
    CHECK_THROWS_AS(assemble_h(bad, greens), ConfigError);
}

TEST_CASE("solve_base: constant weight has the exact trivial solution") {
    const Grid g = make_grid(128);
    const PeriodicField h(g, 1.0);
    const BaseState st = solve_base(12 * kPi, h, PeriodicField(g));
    CHECK(st.residual < 1e-14);
    CHECK(max_abs(st.w) < 1e-13);
    CHECK(st.int_h_ew == doctest::Approx(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(solve_base(16 * kPi, h, PeriodicField(g)), RhoForbiddenError);
}

TEST_CASE("solve_base: smooth nonconstant weight") {
    const Grid g = make_grid(128);
    Greens greens(g);
    WeightSpec ws;
    ws.kind = WeightSpec::Kind::ExpCos;
    ws.c1 = 0.3;
    const PeriodicField h = assemble_h(ws, greens);
    const BaseState st = solve_base(12 * kPi, h, PeriodicField(g));
    CHECK(st.newton_iters <= 10);
    CHECK(st.residual < 1e-11);
    CHECK(max_abs(st.w) > 1e-3); // nonconstant
    CHECK(std::abs(integrate(st.w)) < 1e-12);

    // quadratic convergence tail
    const auto& hist = st.residual_history;
    REQUIRE(hist.size() >= 4);
    for (size_t i = hist.size() - 3; i < hist.size(); ++i) {
        if (hist[i - 1] < 1e-13) continue; // already at rounding level
        REQUIRE(hist[i] < std::pow(hist[i - 1], 1.5));
    }

    // independent residual check
    CHECK(max_abs(base_residual(st.w, h, 12 * kPi)) < 1e-11);

    // gauge invariance: constant initial guesses land on the same solution
    const BaseState st2 = solve_base(12 * kPi, h, PeriodicField(g, 0.7), NewtonOptions{}, false);
    PeriodicField diff = st2.w;
    axpy(diff, -1.0, st.w);
    CHECK(max_abs(diff) < 1e-9);
}

TEST_CASE("jacobian consistency") {
    const Grid g = make_grid(64);
    Greens greens(g);
    WeightSpec ws;
    ws.kind = WeightSpec::Kind::ExpCos;
    ws.c1 = 0.25;
    ws.c2 = -0.15;
    const PeriodicField h = assemble_h(ws, greens);
    const BaseState st = solve_base(12 * kPi, h, PeriodicField(g), NewtonOptions{}, false);

    unsigned state = 91u;
    for (int dir = 0; dir < 10; ++dir) {
        auto next = [&] {
            state = state * 1664525u + 1013904223u;
            return double(state >> 8) / double(1u << 24);
        };
        const double a1 = 2 * next() - 1, a2 = 2 * next() - 1, f1 = 1 + int(3 * next());
        PeriodicField v = sample(g, [&](Vec2 x) {
            return a1 * std::cos(2 * kPi * f1 * x.x) + a2 * std::sin(2 * kPi * x.y);
        });
        project_mean_zero(v);
        const double eps = 1e-6;
        PeriodicField wp = st.w, wm = st.w;
        axpy(wp, eps, v);
        axpy(wm, -eps, v);
        PeriodicField fd = base_residual(wp, h, 12 * kPi);
        axpy(fd, -1.0, base_residual(wm, h, 12 * kPi));
        scale(fd, 1.0 / (2 * eps));
        const PeriodicField Jv = apply_base_jacobian(v, st.w, h, 12 * kPi);
        PeriodicField diff = fd;
        axpy(diff, -1.0, Jv);
        REQUIRE(max_abs(diff) <= 1e-6 * std::max(1.0, max_abs(Jv)));
    }
}

TEST_CASE("non-degeneracy margin") {
    const Grid g = make_grid(64);
    const PeriodicField h(g, 1.0);

    // h == 1, w == 0: operator Delta + 4 pi, spectrum 4 pi - 4 pi^2 |k|^2,
    // smallest magnitude 4 pi (pi - 1) at |k|^2 = 1
    const double margin = nondegeneracy_margin(PeriodicField(g), h, 12 * kPi);
    const double exact = 4 * kPi * (kPi - 1.0);
    CHECK(margin == doctest::Approx(exact).epsilon(1e-4));

    // grid-refinement invariance
    const Grid g2 = make_grid(128);
    const double margin2 = nondegeneracy_margin(PeriodicField(g2), PeriodicField(g2, 1.0), 12 * kPi);
    CHECK(margin2 == doctest::Approx(margin).epsilon(1e-3));

    // degenerate trap: rho - 8 pi = 4 pi^2 puts a zero eigenvalue at |k| = 1
    const double m0 = nondegeneracy_margin(PeriodicField(g), h, 8 * kPi + 4 * kPi * kPi);
    CHECK(m0 < 1e-3);
}

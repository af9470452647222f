#include "mfb/greens.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "mfb/errors.hpp"
#include "mfb/fft.hpp"
#include "mfb/par.hpp"
#include "mfb/spectral.hpp"

namespace mfb {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kEulerGamma = 0.57721566490153286060651209008;

// E_1(x) for x > 0; underflows to 0 past 700.
double exp_int1(double x) {
    if (x > 700.0) return 0.0;
    return -std::expint(-x);
}

// --- pointwise split, beta = 6 -------------------------------------------

constexpr double kBetaPoint = 6.0;
constexpr int kImageRange = 2;  // E_1(36 * 0.25) ~ 1e-5 still matters; |m| <= 2 is deep in the noise
constexpr int kModeRange = 14;  // exp(-pi^2 k^2 / 36) < 1e-18 for |k|^2 > 170

struct FourierTable {
    // Quarter-lattice modes with multiplicity folded into the coefficient of
    // cos(2 pi k.v); covers all k != 0 with |k_i| <= kModeRange.
    struct Mode {
        int k1, k2;
        double coef;
    };
    std::vector<Mode> modes;
    double robin_series = 0.0; // sum over k != 0 of coef at v = 0 handled via modes

    FourierTable() {
        for (int k1 = -kModeRange; k1 <= kModeRange; ++k1) {
            for (int k2 = -kModeRange; k2 <= kModeRange; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                // keep half the lattice, double the weight (cos is even)
                if (k1 < 0 || (k1 == 0 && k2 < 0)) continue;
                const double kk = double(k1) * k1 + double(k2) * k2;
                if (kk > 172.0) continue;
                const double c = std::exp(-kPi * kPi * kk / (kBetaPoint * kBetaPoint)) /
                                 (4.0 * kPi * kPi * kk);
                modes.push_back({k1, k2, 2.0 * c});
            }
        }
    }
};

const FourierTable& fourier_table() {
    static const FourierTable table;
    return table;
}

double fourier_part(Vec2 v) {
    double s = 0.0;
    for (const auto& m : fourier_table().modes)
        s += m.coef * std::cos(kTwoPi * (m.k1 * v.x + m.k2 * v.y));
    return s;
}

double short_range_part(Vec2 v) {
    double s = 0.0;
    for (int mx = -kImageRange; mx <= kImageRange; ++mx) {
        for (int my = -kImageRange; my <= kImageRange; ++my) {
            const double dx = v.x - mx, dy = v.y - my;
            const double r2 = dx * dx + dy * dy;
            if (r2 == 0.0) continue; // caller handles the singular image
            s += exp_int1(kBetaPoint * kBetaPoint * r2);
        }
    }
    return s / (4.0 * kPi);
}

double point_green(Vec2 v) {
    // v reduced to the fundamental cell; nearest image lies inside the 5x5 stencil
    return short_range_part(v) + fourier_part(v) -
           1.0 / (4.0 * kBetaPoint * kBetaPoint);
}

double point_regular(Vec2 v) {
    const double d = std::sqrt(wrap_half(v.x) * wrap_half(v.x) + wrap_half(v.y) * wrap_half(v.y));
    Vec2 vr{wrap_half(v.x), wrap_half(v.y)};
    if (d < 1e-12) {
        // limit value: E_1(b^2 r^2) + 2 ln r -> -gamma - 2 ln b
        double s = (-kEulerGamma - 2.0 * std::log(kBetaPoint)) / (4.0 * kPi);
        for (int mx = -kImageRange; mx <= kImageRange; ++mx)
            for (int my = -kImageRange; my <= kImageRange; ++my) {
                if (mx == 0 && my == 0) continue;
                const double r2 = double(mx) * mx + double(my) * my;
                s += exp_int1(kBetaPoint * kBetaPoint * r2) / (4.0 * kPi);
            }
        return s + fourier_part(vr) - 1.0 / (4.0 * kBetaPoint * kBetaPoint);
    }
    return point_green(vr) + std::log(d) / kTwoPi;
}

} // namespace

Greens::Greens(Grid g) : grid(g) { robin_ = point_regular({0.0, 0.0}); }

double Greens::green_at(Vec2 x, Vec2 p) const { return point_green(torus_offset(x, p)); }

double Greens::regular_at(Vec2 x, Vec2 p) const { return point_regular(torus_offset(x, p)); }

Vec2 Greens::regular_grad_x(Vec2 x, Vec2 p) const {
    const double h = 1e-6;
    const double gx = (regular_at({x.x + h, x.y}, p) - regular_at({x.x - h, x.y}, p)) / (2 * h);
    const double gy = (regular_at({x.x, x.y + h}, p) - regular_at({x.x, x.y - h}, p)) / (2 * h);
    return {gx, gy};
}

// Grid field: Fourier part via one FFT at beta_g = n/8, short-range E_1 on a
// local stencil around p, constant -1/(4 beta_g^2).
PeriodicField Greens::build_field(Vec2 p) const {
    const int n = grid.n;
    const double beta = n / 8.0;
    const int ncol = n / 2 + 1;

    HalfSpectrum s;
    s.n = n;
    s.c.resize(static_cast<size_t>(n) * ncol);
    std::vector<std::complex<double>> ph1(static_cast<size_t>(n)), ph2(static_cast<size_t>(ncol));
    for (int i = 0; i < n; ++i) {
        const double a = -kTwoPi * wave_number(i, n) * p.x;
        ph1[static_cast<size_t>(i)] = {std::cos(a), std::sin(a)};
    }
    for (int j = 0; j < ncol; ++j) {
        const double a = -kTwoPi * j * p.y;
        ph2[static_cast<size_t>(j)] = {std::cos(a), std::sin(a)};
    }
    const double nn = double(n) * n;
    par::for_each(std::ptrdiff_t(n) * ncol, [&](std::ptrdiff_t idx) {
        const int i = int(idx / ncol), j = int(idx % ncol);
        const double k1 = wave_number(i, n), k2 = j;
        const double kk = k1 * k1 + k2 * k2;
        if (kk == 0.0) {
            s.c[static_cast<size_t>(idx)] = 0.0;
            return;
        }
        const double c = std::exp(-kPi * kPi * kk / (beta * beta)) / (4.0 * kPi * kPi * kk);
        s.c[static_cast<size_t>(idx)] =
            nn * c * ph1[static_cast<size_t>(i)] * ph2[static_cast<size_t>(j)];
    });
    PeriodicField f = fft_inverse(s, grid);
    shift(f, -1.0 / (4.0 * beta * beta));

    // Short-range stencil: E_1(beta^2 r^2) < 1e-18 past r = 6.5/beta.  Each
    // (di, dj) is one lattice image; offsets are taken unwrapped so the sum
    // periodizes correctly even when the stencil wraps around the torus.
    const double rcut = 6.5 / beta;
    const int w = int(std::ceil(rcut * n)) + 2;
    const int ic = int(std::floor(p.x * n)), jc = int(std::floor(p.y * n));
    for (int di = -w; di <= w; ++di) {
        for (int dj = -w; dj <= w; ++dj) {
            const Vec2 off{double(ic + di) / n - p.x, double(jc + dj) / n - p.y};
            const double r2 = off.x * off.x + off.y * off.y;
            if (r2 > rcut * rcut) continue;
            const int i = ((ic + di) % n + n) % n;
            const int j = ((jc + dj) % n + n) % n;
            if (r2 < 1e-24) {
                // node coincides with the source: store the regular value
                f.at(i, j) += (-kEulerGamma - 2.0 * std::log(beta)) / (4.0 * kPi);
            } else {
                f.at(i, j) += exp_int1(beta * beta * r2) / (4.0 * kPi);
            }
        }
    }
    return f;
}

const PeriodicField& Greens::field(Vec2 p) const {
    const auto key = std::make_pair(llround(wrap_half(p.x) * 1e12), llround(wrap_half(p.y) * 1e12));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end())
        it = cache_.emplace(key, std::make_unique<PeriodicField>(build_field(p))).first;
    return *it->second;
}

PeriodicField Greens::green(Vec2 p) const {
    PeriodicField f = field(p);
    project_mean_zero(f);
    return f;
}

double Greens::field_mean(Vec2 p) const { return integrate(field(p)); }

CollapsePair make_collapse_pair(double t, Vec2 e, double r0) {
    if (std::abs(norm(e) - 1.0) > 1e-12) throw ConfigError("collapse direction must be a unit vector");
    if (!(t > 0.0) || !(t < 0.5 * r0))
        throw ConfigError("collapse parameter t must satisfy 0 < t < r0/2");
    return CollapsePair{t, e};
}

CollapseFields::CollapseFields(const Greens& greens, const CollapsePair& pair)
    : greens_(greens), pair_(pair) {
    const Vec2 qp = pair.source_plus(), qm = pair.source_minus();
    const PeriodicField& gp = greens.field(qp);
    const PeriodicField& gm = greens.field(qm);

    potential_ = PeriodicField(greens.grid);
    par::for_each(potential_.size(), [&](std::ptrdiff_t k) {
        potential_[k] = 4.0 * kPi * (gp[k] + gm[k]);
    });
    shift_ = project_mean_zero(potential_);

    // regular part field with the same additive normalization as potential_,
    // so potential == regular - 2 ln d+ - 2 ln d- exactly on samples
    const int n = greens.grid.n;
    regular_ = PeriodicField(greens.grid);
    weight_ = PeriodicField(greens.grid);
    par::for_each(regular_.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        const Vec2 x = greens.grid.node(i, j);
        const double dp = torus_dist(x, qp), dm = torus_dist(x, qm);
        double r;
        if (dp < 1e-13 || dm < 1e-13) {
            const double rp = (dp < 1e-13) ? greens.robin() : greens.regular_at(x, qp);
            const double rm = (dm < 1e-13) ? greens.robin() : greens.regular_at(x, qm);
            r = 4.0 * kPi * (rp + rm) - shift_;
        } else {
            r = potential_[k] + 2.0 * std::log(dp) + 2.0 * std::log(dm);
        }
        regular_[k] = r;
        weight_[k] = dp * dp * dm * dm * std::exp(-r);
    });
}

double CollapseFields::regular_at(Vec2 x) const {
    return 4.0 * kPi *
           (greens_.regular_at(x, pair_.source_plus()) + greens_.regular_at(x, pair_.source_minus()));
}

double CollapseFields::weight_at(Vec2 x) const {
    const double dp = torus_dist(x, pair_.source_plus());
    const double dm = torus_dist(x, pair_.source_minus());
    return dp * dp * dm * dm * std::exp(-regular_at(x));
}

} // namespace mfb

// Uniform periodic grid on the unit torus [0,1)^2 and the real scalar fields
// sampled on it.  A field stores n*n samples row-major, value at node
// (i/n, j/n); there is no duplicated boundary row or column.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfb/errors.hpp"
#include "mfb/par.hpp"

namespace mfb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// Wrap a coordinate offset into [-1/2, 1/2).
inline double wrap_half(double u) {
    u -= std::floor(u + 0.5);
    return u;
}

// Torus distance: minimum over lattice images.  Valid for the whole torus;
// the minimizing image is unique except on the measure-zero cut locus.
inline double torus_dist(Vec2 a, Vec2 b) {
    const double dx = wrap_half(a.x - b.x);
    const double dy = wrap_half(a.y - b.y);
    return std::sqrt(dx * dx + dy * dy);
}

// Offset a-b wrapped to the fundamental cell centred at 0.
inline Vec2 torus_offset(Vec2 a, Vec2 b) {
    return {wrap_half(a.x - b.x), wrap_half(a.y - b.y)};
}

struct Grid {
    int n = 0;

    double spacing() const { return 1.0 / n; }
    std::ptrdiff_t size() const { return std::ptrdiff_t(n) * n; }
    Vec2 node(int i, int j) const { return {double(i) / n, double(j) / n}; }

    bool operator==(const Grid&) const = default;
};

inline Grid make_grid(int n) {
    if (n < 16) throw ConfigError("grid n must be >= 16, got " + std::to_string(n));
    if (n % 2 != 0) throw ConfigError("grid n must be even, got " + std::to_string(n));
    return Grid{n};
}

struct PeriodicField {
    Grid grid;
    std::vector<double> v;

    PeriodicField() = default;
    explicit PeriodicField(Grid g, double fill = 0.0)
        : grid(g), v(static_cast<size_t>(g.size()), fill) {}

    int n() const { return grid.n; }
    std::ptrdiff_t size() const { return grid.size(); }
    double& at(int i, int j) { return v[static_cast<size_t>(i) * grid.n + j]; }
    double at(int i, int j) const { return v[static_cast<size_t>(i) * grid.n + j]; }
    double& operator[](std::ptrdiff_t k) { return v[static_cast<size_t>(k)]; }
    double operator[](std::ptrdiff_t k) const { return v[static_cast<size_t>(k)]; }
};

// Sample a function of the node position into a field.
template <class Fn>
PeriodicField sample(Grid g, Fn&& fn) {
    PeriodicField f(g);
    const int n = g.n;
    par::for_each(g.size(), [&](std::ptrdiff_t k) {
        const int i = int(k / n), j = int(k % n);
        f[k] = fn(g.node(i, j));
    });
    return f;
}

template <class Fn>
void transform_inplace(PeriodicField& f, Fn&& fn) {
    par::for_each(f.size(), [&](std::ptrdiff_t k) { f[k] = fn(f[k]); });
}

inline void axpy(PeriodicField& y, double a, const PeriodicField& x) {
    par::for_each(y.size(), [&](std::ptrdiff_t k) { y[k] += a * x[k]; });
}

inline void scale(PeriodicField& f, double a) {
    par::for_each(f.size(), [&](std::ptrdiff_t k) { f[k] *= a; });
}

inline void shift(PeriodicField& f, double a) {
    par::for_each(f.size(), [&](std::ptrdiff_t k) { f[k] += a; });
}

inline double max_abs(const PeriodicField& f) {
    const std::ptrdiff_t k = par::argmax(f.size(), [&](std::ptrdiff_t i) { return std::abs(f[i]); });
    return std::abs(f[k]);
}

} // namespace mfb

#include "mfb/liouville.hpp"

#include <cmath>

#include "mfb/errors.hpp"

namespace mfb {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

double sq(double x) { return x * x; }
} // namespace

double bubble_value(const EntireBubble& b, Vec2 z) {
    const double em = std::exp(b.mu);
    const double r2 = sq(z.x + b.a.x) + sq(z.y + b.a.y);
    return std::log(8.0 * em) - 2.0 * std::log1p(em * r2);
}

double kernel_value(int i, Vec2 z) {
    const double r2 = sq(z.x) + sq(z.y);
    switch (i) {
        case 0: return (1.0 - r2) / (1.0 + r2);
        case 1: return z.x / (1.0 + r2);
        case 2: return z.y / (1.0 + r2);
        default: throw ConfigError("kernel index must be 0, 1 or 2");
    }
}

Vec2 kernel_gradient(int i, Vec2 z) {
    const double r2 = sq(z.x) + sq(z.y);
    const double d2 = sq(1.0 + r2);
    if (i == 1) return {(1.0 + z.y * z.y - z.x * z.x) / d2, -2.0 * z.x * z.y / d2};
    if (i == 2) return {-2.0 * z.x * z.y / d2, (1.0 + z.x * z.x - z.y * z.y) / d2};
    throw ConfigError("kernel_gradient defined for i = 1, 2");
}

double kernel_laplacian(int i, Vec2 z) {
    const double r2 = sq(z.x) + sq(z.y);
    const double d3 = sq(1.0 + r2) * (1.0 + r2);
    if (i == 1) return -8.0 * z.x / d3;
    if (i == 2) return -8.0 * z.y / d3;
    throw ConfigError("kernel_laplacian defined for i = 1, 2");
}

double test_eta1(Vec2 z) {
    const double r2 = sq(z.x) + sq(z.y);
    return -2.0 / (1.0 + r2);
}

double test_eta2(Vec2 z) {
    const double r2 = sq(z.x) + sq(z.y);
    const double y0 = (1.0 - r2) / (1.0 + r2);
    return (4.0 / 3.0) * std::log1p(r2) * y0 + 8.0 / (3.0 * (1.0 + r2));
}

Vec2 eta2_gradient(Vec2 z) {
    // eta_2 = g(r^2) with g(s) = (4/3) ln(1+s) (1-s)/(1+s) + 8/(3(1+s)).
    const double s = sq(z.x) + sq(z.y);
    const double dg = (4.0 / 3.0) * ((1.0 - s) / sq(1.0 + s) - 2.0 * std::log1p(s) / sq(1.0 + s)) -
                      8.0 / (3.0 * sq(1.0 + s));
    return {2.0 * z.x * dg, 2.0 * z.y * dg};
}

double weight_rho(Vec2 z, double alpha) {
    return std::pow(1.0 + norm(z), -1.0 - 0.5 * alpha);
}

RadialIntegral radial_integral(const std::string& name, double r_max) {
    std::function<double(double)> f;
    double tail = 0.0;
    if (name == "bubble_mass") {
        f = [](double r) { return 2.0 * kPi * r * 8.0 / sq(1.0 + r * r); };
        tail = 8.0 * kPi / (r_max * r_max);
    } else if (name == "kernel_y0_mass") {
        f = [](double r) {
            const double r2 = r * r;
            return 2.0 * kPi * r * (1.0 - r2) / (sq(1.0 + r2) * (1.0 + r2));
        };
        tail = kPi / (r_max * r_max);
    } else if (name == "kernel_translation_energy") {
        // Angular reduction of |grad Y_1|^2 + 8 Y_1^2/(1+|z|^2)^2:
        // the angle integral of the gradient term is pi (1 + r^4)/(1+r^2)^4
        // and of the mass term 8 pi r^2/(1+r^2)^4, both times 2 r ... folded:
        f = [](double r) {
            const double r2 = r * r;
            const double d4 = sq(sq(1.0 + r2));
            return 2.0 * kPi * r * (sq(1.0 + r2) + 2.0 * r2) / d4;
        };
        tail = 2.0 * kPi / (r_max * r_max);
    } else if (name == "weight_sq") {
        const double alpha = 0.25;
        f = [alpha](double r) { return 2.0 * kPi * r * std::pow(1.0 + r, -2.0 - alpha); };
        tail = 2.0 * kPi / alpha * std::pow(r_max, -alpha);
    } else {
        throw ConfigError("radial_integral: unknown integrand '" + name + "'");
    }

    RadialIntegral out;
    // Core directly; far region under r = e^s so the adaptive rule sees a
    // compact, smooth integrand whatever r_max is.
    const double split = std::min(8.0, r_max);
    QuadResult q1 = integrate_adaptive(f, 0.0, split, 1e-13);
    out.value = q1.value;
    out.quad_error = q1.error;
    if (r_max > split) {
        auto g = [&f](double s) {
            const double r = std::exp(s);
            return f(r) * r;
        };
        QuadResult q2 = integrate_adaptive(g, std::log(split), std::log(r_max), 1e-13);
        out.value += q2.value;
        out.quad_error += q2.error;
    }
    out.tail_bound = tail;
    return out;
}

} // namespace mfb

#include "mfb/linsolve.hpp"

#include <cmath>

#include "mfb/par.hpp"

namespace mfb {

double flat_dot(const FlatVec& a, const FlatVec& b) {
    return par::block_sum(std::ptrdiff_t(a.size()),
                          [&](std::ptrdiff_t k) { return a[size_t(k)] * b[size_t(k)]; });
}

double flat_norm(const FlatVec& a) { return std::sqrt(flat_dot(a, a)); }

namespace {

void axpy_flat(FlatVec& y, double c, const FlatVec& x) {
    par::for_each(std::ptrdiff_t(y.size()), [&](std::ptrdiff_t k) { y[size_t(k)] += c * x[size_t(k)]; });
}

} // namespace

GmresResult gmres(const ApplyFn& apply, const ApplyFn& precond, const FlatVec& rhs, FlatVec& x,
                  const GmresOptions& opt) {
    const size_t n = rhs.size();
    GmresResult out;
    FlatVec tmp(n), r(n);

    auto apply_prec = [&](const FlatVec& v, FlatVec& w) {
        if (precond) {
            precond(v, w);
        } else {
            w = v;
        }
    };

    // preconditioned rhs norm for the relative criterion
    apply_prec(rhs, r);
    const double b_norm = flat_norm(r);
    if (b_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        out.converged = true;
        return out;
    }
    const double target = std::max(opt.rel_tol * b_norm, opt.abs_tol);

    const int m = opt.restart;
    std::vector<FlatVec> basis;
    std::vector<double> H((m + 1) * m, 0.0);
    std::vector<double> cs(m), sn(m), g(m + 1);

    int total_it = 0;
    while (total_it < opt.max_iter) {
        // r = M^-1 (b - A x)
        apply(x, tmp);
        par::for_each(std::ptrdiff_t(n),
                      [&](std::ptrdiff_t k) { tmp[size_t(k)] = rhs[size_t(k)] - tmp[size_t(k)]; });
        apply_prec(tmp, r);
        double beta = flat_norm(r);
        out.residual_norm = beta;
        out.iterations = total_it;
        if (beta <= target) {
            out.converged = true;
            return out;
        }

        basis.assign(1, r);
        par::for_each(std::ptrdiff_t(n), [&](std::ptrdiff_t k) { basis[0][size_t(k)] /= beta; });
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        for (; j < m && total_it < opt.max_iter; ++j, ++total_it) {
            apply(basis[size_t(j)], tmp);
            FlatVec w(n);
            apply_prec(tmp, w);
            // modified Gram-Schmidt with one re-orthogonalization pass
            for (int i = 0; i <= j; ++i) {
                const double hij = flat_dot(w, basis[size_t(i)]);
                H[size_t(i) * m + size_t(j)] = hij;
                axpy_flat(w, -hij, basis[size_t(i)]);
            }
            for (int i = 0; i <= j; ++i) {
                const double corr = flat_dot(w, basis[size_t(i)]);
                H[size_t(i) * m + size_t(j)] += corr;
                axpy_flat(w, -corr, basis[size_t(i)]);
            }
            const double hlast = flat_norm(w);
            // Givens rotations to maintain the least-squares residual
            double h_jj[2] = {0.0, hlast};
            for (int i = 0; i < j; ++i) {
                const double t0 = cs[size_t(i)] * H[size_t(i) * m + size_t(j)] +
                                  sn[size_t(i)] * H[size_t(i + 1) * m + size_t(j)];
                H[size_t(i + 1) * m + size_t(j)] =
                    -sn[size_t(i)] * H[size_t(i) * m + size_t(j)] +
                    cs[size_t(i)] * H[size_t(i + 1) * m + size_t(j)];
                H[size_t(i) * m + size_t(j)] = t0;
            }
            h_jj[0] = H[size_t(j) * m + size_t(j)];
            const double denom = std::hypot(h_jj[0], h_jj[1]);
            cs[size_t(j)] = denom == 0.0 ? 1.0 : h_jj[0] / denom;
            sn[size_t(j)] = denom == 0.0 ? 0.0 : h_jj[1] / denom;
            H[size_t(j) * m + size_t(j)] = denom;
            g[size_t(j + 1)] = -sn[size_t(j)] * g[size_t(j)];
            g[size_t(j)] = cs[size_t(j)] * g[size_t(j)];
            out.residual_norm = std::abs(g[size_t(j + 1)]);

            if (hlast != 0.0 && j + 1 < m + 1) {
                FlatVec v = w;
                par::for_each(std::ptrdiff_t(n), [&](std::ptrdiff_t k) { v[size_t(k)] /= hlast; });
                basis.push_back(std::move(v));
            } else {
                basis.push_back(FlatVec(n, 0.0)); // breakdown: exact solution in span
            }
            if (out.residual_norm <= target) {
                ++j;
                ++total_it;
                break;
            }
        }

        // back substitution and update
        std::vector<double> y(size_t(j), 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[size_t(i)];
            for (int k2 = i + 1; k2 < j; ++k2) s -= H[size_t(i) * m + size_t(k2)] * y[size_t(k2)];
            y[size_t(i)] = s / H[size_t(i) * m + size_t(i)];
        }
        for (int i = 0; i < j; ++i) axpy_flat(x, y[size_t(i)], basis[size_t(i)]);

        out.iterations = total_it;
        if (out.residual_norm <= target) {
            out.converged = true;
            return out;
        }
    }
    out.iterations = total_it;
    return out;
}

} // namespace mfb

// Restarted GMRES on flat coefficient vectors with optional left
// preconditioning.  Dot products use the deterministic blockwise reduction,
// so runs are bit-reproducible independent of thread count.
#pragma once

#include <functional>
#include <vector>

namespace mfb {

using FlatVec = std::vector<double>;
using ApplyFn = std::function<void(const FlatVec&, FlatVec&)>;

struct GmresOptions {
    int restart = 40;
    int max_iter = 600;
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
};

struct GmresResult {
    int iterations = 0;
    double residual_norm = 0.0; // preconditioned norm
    bool converged = false;
};

// Solves A x = b with M^-1 applied on the left.  x holds the initial guess on
// entry and the solution on exit.  precond may be empty (identity).
GmresResult gmres(const ApplyFn& apply, const ApplyFn& precond, const FlatVec& rhs, FlatVec& x,
                  const GmresOptions& opt);

double flat_dot(const FlatVec& a, const FlatVec& b);
double flat_norm(const FlatVec& a);

} // namespace mfb

#pragma once

#include "afieti/types.hpp"

#include <functional>
#include <vector>

namespace afieti {

using LinearMap = std::function<Vector(const Vector&)>;

struct SolveReport {
    int iterations = 0;
    /// Preconditioned residual norms relative to the initial one, starting with 1.
    std::vector<double> history;
    /// ||A x - b|| / ||b||
    double true_residual = 0.0;
    bool converged = false;
    bool breakdown = false;
    double seconds = 0.0;
};

/// Optional per-iteration hook receiving the current iterate.
using IterateObserver = std::function<void(int, const Vector&)>;

/// Preconditioned MINRES from the zero initial guess. The stopping test uses the preconditioned
/// residual ||r||_{P} / ||b||_{P} <= tol. max_iter <= 0 selects 2 * size + 100.
Vector minres(const LinearMap& apply_A, const LinearMap& apply_Binv, const Vector& b, double tol, int max_iter,
              SolveReport& report, const IterateObserver& observer = {});

}  // namespace afieti

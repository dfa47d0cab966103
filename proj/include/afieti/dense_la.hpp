#pragma once

#include "afieti/types.hpp"

namespace afieti {

/// Lower Cholesky factor L with L L^T = A; throws NotPositiveDefinite on a non-positive pivot.
Matrix cholesky(const Matrix& A);

/// Solves with a lower Cholesky factor (columns of rhs independently).
Matrix cholesky_solve(const Matrix& L, const Matrix& rhs);

/// L^{-1} rhs and L^{-T} rhs for a lower-triangular L.
Matrix solve_lower(const Matrix& L, const Matrix& rhs);
Matrix solve_lower_transpose(const Matrix& L, const Matrix& rhs);

/// Reusable dense Cholesky factorization.
class DenseCholesky {
public:
    DenseCholesky() = default;
    explicit DenseCholesky(const Matrix& A) : L_(cholesky(A)) {}
    Matrix solve(const Matrix& rhs) const { return cholesky_solve(L_, rhs); }
    Vector solve(const Vector& rhs) const { return cholesky_solve(L_, rhs); }
    const Matrix& factor() const { return L_; }
    Index size() const { return L_.rows(); }

private:
    Matrix L_;
};

/// Row-pivoted LU; throws SingularMatrix when a pivot vanishes to working precision.
class DenseLU {
public:
    explicit DenseLU(const Matrix& A);
    Matrix solve(const Matrix& rhs) const;
    Vector solve(const Vector& rhs) const;

private:
    Matrix lu_;
    std::vector<Index> perm_;
};

Vector solve_spd(const Matrix& A, const Vector& rhs);
Vector solve_lu(const Matrix& A, const Vector& rhs);

struct SymmetricEigen {
    Vector values;   ///< ascending
    Matrix vectors;  ///< orthonormal columns
};

/// Cyclic-by-row Jacobi; NumericalFailure after max_sweeps without convergence.
SymmetricEigen jacobi_eig(const Matrix& A, int max_sweeps = 50);

/// Generalized eigendecomposition K U = M U D with U^T M U = I and U^T K U = D.
struct PencilEigen {
    Matrix U;
    Vector D;  ///< ascending, tiny negative values clamped to zero
};

PencilEigen pencil_eig(const Matrix& K, const Matrix& M);

}  // namespace afieti

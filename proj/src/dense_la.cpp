#include "afieti/dense_la.hpp"

#include "afieti/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace afieti {

Matrix cholesky(const Matrix& A) {
    if (A.rows() != A.cols()) throw ArgumentError("Cholesky of a non-square matrix");
    const Index n = A.rows();
    Matrix L = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        double d = A(j, j);
        for (Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0)) throw NotPositiveDefinite("non-positive pivot in Cholesky factorization");
        const double ljj = std::sqrt(d);
        L(j, j) = ljj;
        for (Index i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    return L;
}

Matrix solve_lower(const Matrix& L, const Matrix& rhs) {
    Matrix X = rhs;
    const Index n = L.rows();
    for (Index c = 0; c < X.cols(); ++c) {
        for (Index i = 0; i < n; ++i) {
            double s = X(i, c);
            for (Index k = 0; k < i; ++k) s -= L(i, k) * X(k, c);
            X(i, c) = s / L(i, i);
        }
    }
    return X;
}

Matrix solve_lower_transpose(const Matrix& L, const Matrix& rhs) {
    Matrix X = rhs;
    const Index n = L.rows();
    for (Index c = 0; c < X.cols(); ++c) {
        for (Index i = n - 1; i >= 0; --i) {
            double s = X(i, c);
            for (Index k = i + 1; k < n; ++k) s -= L(k, i) * X(k, c);
            X(i, c) = s / L(i, i);
        }
    }
    return X;
}

Matrix cholesky_solve(const Matrix& L, const Matrix& rhs) {
    if (rhs.rows() != L.rows()) throw ArgumentError("Cholesky solve: size mismatch");
    return solve_lower_transpose(L, solve_lower(L, rhs));
}

DenseLU::DenseLU(const Matrix& A) : lu_(A) {
    if (A.rows() != A.cols()) throw ArgumentError("LU of a non-square matrix");
    const Index n = A.rows();
    perm_.resize(static_cast<std::size_t>(n));
    std::iota(perm_.begin(), perm_.end(), Index{0});
    const double scale = A.cwiseAbs().maxCoeff();
    for (Index k = 0; k < n; ++k) {
        Index piv = k;
        lu_.col(k).tail(n - k).cwiseAbs().maxCoeff(&piv);
        piv += k;
        if (!(std::abs(lu_(piv, k)) > 1e-14 * scale * static_cast<double>(n))) {
            throw SingularMatrix("matrix is singular to working precision");
        }
        if (piv != k) {
            lu_.row(k).swap(lu_.row(piv));
            std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(piv)]);
        }
        for (Index i = k + 1; i < n; ++i) {
            lu_(i, k) /= lu_(k, k);
            lu_.row(i).tail(n - k - 1) -= lu_(i, k) * lu_.row(k).tail(n - k - 1);
        }
    }
}

Matrix DenseLU::solve(const Matrix& rhs) const {
    const Index n = lu_.rows();
    if (rhs.rows() != n) throw ArgumentError("LU solve: size mismatch");
    Matrix X(n, rhs.cols());
    for (Index i = 0; i < n; ++i) X.row(i) = rhs.row(perm_[static_cast<std::size_t>(i)]);
    for (Index c = 0; c < X.cols(); ++c) {
        for (Index i = 0; i < n; ++i)
            for (Index k = 0; k < i; ++k) X(i, c) -= lu_(i, k) * X(k, c);
        for (Index i = n - 1; i >= 0; --i) {
            for (Index k = i + 1; k < n; ++k) X(i, c) -= lu_(i, k) * X(k, c);
            X(i, c) /= lu_(i, i);
        }
    }
    return X;
}

Vector DenseLU::solve(const Vector& rhs) const { return solve(Matrix(rhs)).col(0); }

Vector solve_spd(const Matrix& A, const Vector& rhs) {
    Matrix L;
    try {
        L = cholesky(A);
    } catch (const NotPositiveDefinite&) {
        throw SingularMatrix("SPD solve: matrix not positive definite");
    }
    return cholesky_solve(L, rhs).col(0);
}

Vector solve_lu(const Matrix& A, const Vector& rhs) { return DenseLU(A).solve(rhs); }

SymmetricEigen jacobi_eig(const Matrix& A0, int max_sweeps) {
    if (A0.rows() != A0.cols()) throw ArgumentError("eigendecomposition of a non-square matrix");
    const Index n = A0.rows();
    Matrix A = 0.5 * (A0 + A0.transpose());
    Matrix Q = Matrix::Identity(n, n);
    const double norm = A.norm();
    auto off = [&]() {
        double s = 0.0;
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i)
                if (i != j) s += A(i, j) * A(i, j);
        return std::sqrt(s);
    };
    const double tol = 1e-15 * norm;
    bool converged = norm == 0.0 || off() <= tol;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J with J the (p,q) rotation
                for (Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                for (Index k = 0; k < n; ++k) {
                    const double qkp = Q(k, p), qkq = Q(k, q);
                    Q(k, p) = c * qkp - s * qkq;
                    Q(k, q) = s * qkp + c * qkq;
                }
            }
        }
        converged = off() <= tol;
    }
    if (!converged) throw NumericalFailure("Jacobi eigensolver did not converge");

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return A(a, a) < A(b, b); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        out.values[k] = A(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = Q.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

PencilEigen pencil_eig(const Matrix& K, const Matrix& M) {
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw ArgumentError("pencil matrices must be square and of equal size");
    const Matrix L = cholesky(M);
    // C = L^{-1} K L^{-T}
    const Matrix X = solve_lower(L, K);
    Matrix C = solve_lower(L, Matrix(X.transpose()));
    C = 0.5 * (C + C.transpose());
    auto eig = jacobi_eig(C);
    PencilEigen out;
    out.U = solve_lower_transpose(L, eig.vectors);
    out.D = eig.values;
    const double scale = out.D.cwiseAbs().maxCoeff();
    for (Index i = 0; i < out.D.size(); ++i) {
        if (out.D[i] < 0.0 && out.D[i] >= -1e-12 * scale) out.D[i] = 0.0;
    }
    return out;
}

}  // namespace afieti

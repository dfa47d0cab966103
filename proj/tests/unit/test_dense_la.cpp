#include <doctest.h>

#include "afieti/assembly.hpp"
#include "afieti/dense_la.hpp"
#include "afieti/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <random>

using namespace afieti;

namespace {

Matrix random_spd(Index n, std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix X(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) X(i, j) = g(rng);
    return X * X.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

// 1D linear FE stiffness and mass with natural boundary: stiffness has the constant kernel
void fe_pair(Index n, Matrix& K, Matrix& M) {
    const double h = 1.0 / static_cast<double>(n - 1);
    K = Matrix::Zero(n, n);
    M = Matrix::Zero(n, n);
    for (Index e = 0; e + 1 < n; ++e) {
        K(e, e) += 1.0 / h;
        K(e + 1, e + 1) += 1.0 / h;
        K(e, e + 1) -= 1.0 / h;
        K(e + 1, e) -= 1.0 / h;
        M(e, e) += h / 3.0;
        M(e + 1, e + 1) += h / 3.0;
        M(e, e + 1) += h / 6.0;
        M(e + 1, e) += h / 6.0;
    }
}

}  // namespace

TEST_CASE("cholesky") {
    Matrix A(2, 2);
    A << 4, 2, 2, 3;
    const Matrix L = cholesky(A);
    CHECK(L(0, 0) == doctest::Approx(2.0));
    CHECK(L(1, 0) == doctest::Approx(1.0));
    CHECK(L(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(L(0, 1) == 0.0);

    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(cholesky(bad), NotPositiveDefinite);

    std::mt19937 rng(3);
    const Matrix S = random_spd(30, rng);
    const Matrix L2 = cholesky(S);
    CHECK((L2 * L2.transpose() - S).norm() <= 1e-12 * S.norm());
    const Vector b = Vector::Random(30);
    CHECK((S * solve_spd(S, b) - b).norm() <= 1e-11 * b.norm());
}

TEST_CASE("lu solve") {
    Matrix A(3, 3);
    A << 0, 1, 2, 1, 0, 3, 4, -3, 8;
    const Vector b = Vector::Ones(3);
    const Vector x = solve_lu(A, b);
    CHECK((A * x - b).norm() <= 1e-13);

    Matrix sing(2, 2);
    sing << 1, 2, 2, 4;
    CHECK_THROWS_AS(solve_lu(sing, Vector::Ones(2)), SingularMatrix);
}

TEST_CASE("jacobi eigensolver against library oracle") {
    Matrix D = Matrix::Zero(3, 3);
    D.diagonal() << 3, 1, 2;
    auto e = jacobi_eig(D);
    CHECK(e.values[0] == 1.0);
    CHECK(e.values[1] == 2.0);
    CHECK(e.values[2] == 3.0);

    std::mt19937 rng(11);
    for (Index n : {5, 17, 40}) {
        const Matrix S = random_spd(n, rng) - 2.0 * static_cast<double>(n) * Matrix::Identity(n, n);
        auto mine = jacobi_eig(S);
        Eigen::SelfAdjointEigenSolver<Matrix> ref(S);
        CHECK((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-11 * S.norm());
        CHECK((mine.vectors.transpose() * mine.vectors - Matrix::Identity(n, n)).norm() <= 1e-12);
        const Matrix off = mine.vectors.transpose() * S * mine.vectors - Matrix(mine.values.asDiagonal());
        CHECK(off.norm() <= 1e-12 * S.norm());
    }
}

TEST_CASE("pencil eigendecomposition") {
    Matrix K, M;
    fe_pair(12, K, M);
    auto pe = pencil_eig(K, M);
    const Index n = 12;
    CHECK((pe.U.transpose() * M * pe.U - Matrix::Identity(n, n)).norm() <= 1e-11);
    CHECK((pe.U.transpose() * K * pe.U - Matrix(pe.D.asDiagonal())).norm() <= 1e-10 * K.norm());
    // exactly one zero mode (constants), all others positive
    int zeros = 0;
    for (Index i = 0; i < n; ++i) {
        CHECK(pe.D[i] >= 0.0);
        if (pe.D[i] <= 1e-9 * pe.D.maxCoeff()) ++zeros;
    }
    CHECK(zeros == 1);

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ref(K, M);
    CHECK((pe.D.tail(n - 1) - ref.eigenvalues().tail(n - 1)).cwiseAbs().maxCoeff() <= 1e-9 * pe.D.maxCoeff());

    Matrix notspd = M;
    notspd(0, 0) = -1.0;
    CHECK_THROWS_AS(pencil_eig(K, notspd), NotPositiveDefinite);
}

TEST_CASE("jacobi eigensolver: swap matrix and trace/determinant oracle") {
    Matrix S(2, 2);
    S << 0, 1, 1, 0;
    const auto e = jacobi_eig(S);
    CHECK(e.values[0] == doctest::Approx(-1.0));
    CHECK(e.values[1] == doctest::Approx(1.0));

    std::mt19937 rng(21);
    std::normal_distribution<double> g;
    Matrix A(30, 30);
    for (Index i = 0; i < 30; ++i)
        for (Index j = 0; j <= i; ++j) A(i, j) = A(j, i) = g(rng);
    const auto r = jacobi_eig(A);
    CHECK(std::abs(r.values.sum() - A.trace()) <= 1e-9 * A.norm());
    const double det = A.partialPivLu().determinant();
    CHECK(std::abs(r.values.prod() - det) <= 1e-9 * std::abs(det));
}

TEST_CASE("pencil eigendecomposition: diagonal and spline pencils") {
    Matrix K = Matrix::Zero(2, 2);
    K.diagonal() << 4, 1;
    const auto pe = pencil_eig(K, Matrix::Identity(2, 2));
    CHECK(pe.D[0] == doctest::Approx(1.0));
    CHECK(pe.D[1] == doctest::Approx(4.0));
    CHECK(pe.U.cwiseAbs().isApprox(Matrix{{0.0, 1.0}, {1.0, 0.0}}));

    Matrix Ks, Ms;
    univariate_matrices(SplineBasis(KnotVector::uniform(2, 8)), Ks, Ms);
    const auto sp = pencil_eig(Ks, Ms);
    const Index n = Ks.rows();
    CHECK((sp.U.transpose() * Ms * sp.U - Matrix::Identity(n, n)).norm() <= 1e-10);
    CHECK((sp.U.transpose() * Ks * sp.U - Matrix(sp.D.asDiagonal())).norm() <= 1e-10 * Ks.norm());
    // reconstruction K = U^-T D U^-1, M = U^-T U^-1
    const Matrix Uinv = sp.U.inverse();
    CHECK((Uinv.transpose() * sp.D.asDiagonal() * Uinv - Ks).norm() <= 1e-10 * Ks.norm());
    CHECK((Uinv.transpose() * Uinv - Ms).norm() <= 1e-10 * Ms.norm());
    for (Index i = 1; i < n; ++i) CHECK(sp.D[i] >= sp.D[i - 1]);
    int zeros = 0;
    for (Index i = 0; i < n; ++i) zeros += sp.D[i] <= 1e-10 * sp.D.maxCoeff();
    CHECK(zeros == 1);
}

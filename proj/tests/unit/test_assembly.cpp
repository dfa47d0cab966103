#include <doctest.h>

#include "afieti/assembly.hpp"
#include "afieti/constraints.hpp"
#include "afieti/error.hpp"
#include "afieti/problem.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <random>

using namespace afieti;

namespace {

Patch affine_patch(int d, int p, const std::vector<int>& e, const Matrix& A, const Vector& b) {
    return uniform_patch(d, p, e, [A, b](const Vector& eta) { return Vector(A * eta + b); });
}

Patch wavy_patch(int p, int e) {
    return uniform_patch(2, p, {e, e}, [](const Vector& s) {
        return Vector{{s[0] + 0.1 * std::sin(3.0 * s[1]), s[1] + 0.15 * s[0] * s[0] + 0.05 * s[0] * s[1]}};
    });
}

// derivative of a B-spline by the two-term recurrence on lower-degree functions
double cdb_derivative(const KnotVector& kv, Index i, double x) {
    const int p = kv.degree();
    const auto& U = kv.knots();
    auto u = [&](Index k) { return U[static_cast<std::size_t>(k)]; };
    double v = 0.0;
    if (u(i + p) > u(i)) v += p / (u(i + p) - u(i)) * oracle::cox_de_boor(kv, i, x, p - 1);
    if (u(i + p + 1) > u(i + 1)) v -= p / (u(i + p + 1) - u(i + 1)) * oracle::cox_de_boor(kv, i + 1, x, p - 1);
    return v;
}

bool symmetric(const SparseMatrix& A, double tol = 1e-12) {
    const Matrix D(A);
    return (D - D.transpose()).norm() <= tol * D.norm();
}

}  // namespace

TEST_CASE("Q1 element matrix matches closed-form integrals") {
    const ElasticityCoefficients c{0.7, 1.3};
    const Patch patch = affine_patch(2, 1, {1, 1}, Matrix::Identity(2, 2), Vector::Zero(2));
    const Matrix A(assemble_stiffness(patch, c));
    // 1D integrals of the hat pair on [0, 1]
    const Matrix K1{{1.0, -1.0}, {-1.0, 1.0}};
    const Matrix M1{{1.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 3}};
    const Matrix G1{{-0.5, -0.5}, {0.5, 0.5}};  // int phi_i' phi_j
    // D[r][s](i, j) = int d_r phi_i d_s phi_j, direction 0 fastest
    Matrix D[2][2];
    D[0][0] = oracle::kron(M1, K1);
    D[1][1] = oracle::kron(K1, M1);
    D[0][1] = oracle::kron(Matrix(G1.transpose()), G1);
    D[1][0] = oracle::kron(G1, Matrix(G1.transpose()));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            Matrix ref = c.mu * D[b][a] + c.lambda * D[a][b];
            if (a == b) ref += c.mu * (D[0][0] + D[1][1]);
            CHECK((A.block(4 * a, 4 * b, 4, 4) - ref).norm() < 1e-12);
        }
}

TEST_CASE("stiffness is symmetric PSD with the rigid kernel") {
    const ElasticityCoefficients c;
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    for (const Patch& patch : {wavy_patch(2, 3), affine_patch(3, 2, {2, 2, 2}, Matrix::Identity(3, 3), Vector::Zero(3))}) {
        const SparseMatrix A = assemble_stiffness(patch, c);
        CHECK(symmetric(A));
        CHECK(symmetric(assemble_mass(patch)));
        for (int t = 0; t < 100; ++t) {
            Vector x(A.rows());
            for (Index i = 0; i < x.size(); ++i) x[i] = g(rng);
            CHECK(x.dot(A * x) >= -1e-12 * x.squaredNorm() * Matrix(A).norm());
        }
        const int d = patch.dim();
        const Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(A)};
        const Vector ev = es.eigenvalues();
        int zeros = 0;
        for (Index i = 0; i < ev.size(); ++i) zeros += std::abs(ev[i]) <= 1e-10 * ev.cwiseAbs().maxCoeff();
        CHECK(zeros == d * (d + 1) / 2);
        const Matrix R = rigid_modes(patch);
        CHECK((A * R).norm() <= 1e-11 * Matrix(A).norm() * R.norm());
    }
}

TEST_CASE("mass and load totals") {
    const Matrix S{{2.0, 0.5}, {0.0, 1.5}};  // parallelogram of area 3
    const Patch patch = affine_patch(2, 2, {3, 2}, S, Vector{{1.0, -1.0}});
    const SparseMatrix Ms = assemble_scalar_mass(patch);
    CHECK(Matrix(Ms).sum() == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(Matrix(assemble_mass(patch)).sum() == doctest::Approx(6.0).epsilon(1e-13));

    const Patch unit = affine_patch(2, 1, {2, 2}, Matrix::Identity(2, 2), Vector::Zero(2));
    LoadData one;
    one.body = [](const Vector&) { return Vector::Ones(2); };
    CHECK(assemble_load(unit, one, {}).sum() == doctest::Approx(2.0).epsilon(1e-14));

    LoadData tr;
    tr.traction = [](const Vector&, const Vector& n) { return Vector(n); };
    // outward normal on eta_0 = 1 of the parallelogram: component sums give the face normal times length
    const Vector f = assemble_load(patch, tr, {1});
    const Index n = patch.num_basis();
    const Vector edge = S.col(1);
    const Vector normal = Vector{{edge[1], -edge[0]}};  // rotated edge, length = |edge|
    CHECK(f.head(n).sum() == doctest::Approx(normal[0]).epsilon(1e-13));
    CHECK(f.tail(n).sum() == doctest::Approx(normal[1]).epsilon(1e-13));
}

TEST_CASE("polynomial load against an exact quadrature oracle") {
    // on an affine patch with p = 2 the p + 1 point rule integrates x^2 b_i exactly
    const Patch patch = affine_patch(2, 2, {4, 3}, Matrix{{2.0, 0.0}, {0.0, 1.0}}, Vector::Zero(2));
    LoadData ld;
    ld.body = [](const Vector& x) { return Vector{{x[0] * x[0], x[0] * x[1]}}; };
    const Vector f = assemble_load(patch, ld, {});
    const KnotVector k0 = patch.basis(0).knots(), k1 = patch.basis(1).knots();
    const Index n0 = patch.basis(0).size(), n1 = patch.basis(1).size();
    const auto br0 = patch.basis(0).breakpoints(), br1 = patch.basis(1).breakpoints();
    double worst = 0.0;
    for (Index j = 0; j < n1; ++j)
        for (Index i = 0; i < n0; ++i) {
            // separable integrands; |det J| = 2 and x = 2 s, y = t
            const double ix2 = oracle::integrate_piecewise([&](double s) { return 4 * s * s * oracle::cox_de_boor(k0, i, s); }, br0);
            const double ix = oracle::integrate_piecewise([&](double s) { return 2 * s * oracle::cox_de_boor(k0, i, s); }, br0);
            const double iy0 = oracle::integrate_piecewise([&](double t) { return oracle::cox_de_boor(k1, j, t); }, br1);
            const double iy1 = oracle::integrate_piecewise([&](double t) { return t * oracle::cox_de_boor(k1, j, t); }, br1);
            const Index idx = i + n0 * j;
            worst = std::max(worst, std::abs(f[idx] - 2 * ix2 * iy0));
            worst = std::max(worst, std::abs(f[n0 * n1 + idx] - 2 * ix * iy1));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("parametric blocks equal the identity-map diagonal blocks") {
    const ElasticityCoefficients c{0.4, 0.9};
    for (int p : {1, 2}) {
        const int d = 2;
        const Patch patch = affine_patch(d, p, {p == 1 ? 1 : 3, 2}, Matrix::Identity(d, d), Vector::Zero(d));
        const ParametricBlocks pb = parametric_blocks(patch);
        const SparseMatrix A = assemble_stiffness(patch, c);
        for (int l = 0; l < d; ++l) {
            const Matrix Al = pb.stiffness(l, c).materialize();
            CHECK(oracle::rel_err(Al, Matrix(component_block(A, d, l, l))) < 1e-12);
            CHECK((Al * Vector::Ones(Al.cols())).norm() < 1e-12 * Al.norm());
        }
        CHECK(oracle::rel_err(pb.mass().materialize(), Matrix(assemble_scalar_mass(patch))) < 1e-12);
    }
}

TEST_CASE("parametric blocks are linear in mu") {
    const Patch patch = wavy_patch(2, 3);
    const ParametricBlocks pb = parametric_blocks(patch);
    const ElasticityCoefficients a{0.0, 1.0}, b{0.0, 2.0};
    for (int l = 0; l < 2; ++l)
        CHECK(oracle::rel_err(pb.stiffness(l, b).materialize(), 2.0 * pb.stiffness(l, a).materialize()) < 1e-14);
}

TEST_CASE("shifted parametric blocks are SPD on every preset patch") {
    for (const auto& name : preset_names()) {
        const Problem pr = make_preset(name, {2, 2, 2});
        for (const Patch& patch : pr.domain.patches()) {
            const ParametricBlocks pb = parametric_blocks(patch);
            for (int l = 0; l < patch.dim(); ++l) {
                const Matrix T = pb.stiffness(l, pr.coeffs).materialize() + pb.mass().materialize();
                CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(T).eigenvalues().minCoeff() > 0.0);
            }
        }
    }
}

TEST_CASE("univariate matrices against Cox-de Boor integration") {
    const SplineBasis basis(KnotVector::uniform(3, 4));
    const QuadratureRule rule = gauss_rule(basis);
    Matrix K, M, K2, M2, Kw, Mw;
    weighted_univariate(basis, rule, Vector::Ones(rule.size()), Vector::Ones(rule.size()), K, M);
    weighted_univariate(basis, rule, Vector::Constant(rule.size(), 2.0), Vector::Constant(rule.size(), 2.0), K2, M2);
    CHECK(oracle::rel_err(K2, 2.0 * K) < 1e-15);
    CHECK(oracle::rel_err(M2, 2.0 * M) < 1e-15);
    // linear weight: exact for the p + 1 point rule
    Vector w(rule.size());
    for (Index q = 0; q < rule.size(); ++q) w[q] = 1.0 + rule.points[static_cast<std::size_t>(q)];
    weighted_univariate(basis, rule, w, w, Kw, Mw);
    const KnotVector& kv = basis.knots();
    const auto br = basis.breakpoints();
    for (Index i = 0; i < basis.size(); ++i)
        for (Index j = 0; j < basis.size(); ++j) {
            const double m = oracle::integrate_piecewise(
                [&](double x) { return (1 + x) * oracle::cox_de_boor(kv, i, x) * oracle::cox_de_boor(kv, j, x); }, br);
            const double k = oracle::integrate_piecewise(
                [&](double x) { return (1 + x) * cdb_derivative(kv, i, x) * cdb_derivative(kv, j, x); }, br);
            CHECK(std::abs(Mw(i, j) - m) < 1e-10);
            CHECK(std::abs(Kw(i, j) - k) < 1e-10);
        }
}

TEST_CASE("coefficient tensor on identity and scaling maps") {
    const ElasticityCoefficients c{0.3, 0.8};
    const Patch id = affine_patch(2, 2, {2, 2}, Matrix::Identity(2, 2), Vector::Zero(2));
    const CoefficientField f = coefficient_tensor(id, c, 1);
    Matrix ref = c.mu * Matrix::Identity(2, 2);
    ref(1, 1) += c.mu + c.lambda;
    for (const auto& v : f.values) CHECK((v - ref).norm() < 1e-14);

    const double s = 1.7;
    const Patch sc = affine_patch(3, 1, {2, 1, 1}, s * Matrix::Identity(3, 3), Vector::Zero(3));
    Matrix ref3 = c.mu * Matrix::Identity(3, 3);
    ref3(0, 0) += c.mu + c.lambda;
    for (const auto& v : coefficient_tensor(sc, c, 0).values) CHECK((v - s * ref3).norm() < 1e-13);

    for (const auto& v : coefficient_tensor(wavy_patch(2, 3), c, 0).values)
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(v).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("separable fit: constant and product inputs") {
    const std::vector<Index> sizes{4, 5};
    const MultiIndexMap grid(sizes);
    Matrix con = Matrix::Constant(grid.total(), 2, 3.0);
    const SeparableCoefficient fc = separable_fit(con, sizes);
    CHECK(fc.residual < 1e-14);
    for (Index g = 0; g < grid.total(); ++g)
        for (int m = 0; m < 2; ++m) CHECK(fc.value(m, grid.multi(g)) == doctest::Approx(3.0).epsilon(1e-13));

    Matrix prod(grid.total(), 2);
    for (Index g = 0; g < grid.total(); ++g) {
        const auto q = grid.multi(g);
        const double g1 = 1.0 + 0.3 * q[0], g2 = 2.0 / (1.0 + q[1]);
        prod(g, 0) = 1.5 * g1 * g2;
        prod(g, 1) = 0.5 * g1 * g2 * g2;  // diagonal 1: nu_1 = 0.5 g2^2, beta_0 = g1
    }
    // the model needs nu_0(q0) beta_1(q1) and nu_1(q1) beta_0(q0): choose beta_1 = g2, beta_0 = g1
    const SeparableCoefficient fp = separable_fit(prod, sizes);
    CHECK(fp.residual < 1e-12);
    for (Index g = 0; g < grid.total(); ++g)
        for (int m = 0; m < 2; ++m) CHECK(std::abs(fp.value(m, grid.multi(g)) / prod(g, m) - 1.0) < 1e-12);
    double lg = 0.0;
    for (Index i = 0; i < fp.beta[0].size(); ++i) lg += std::log(fp.beta[0][i]);
    CHECK(std::abs(lg) < 1e-12);

    Matrix bad = con;
    bad(3, 1) = -1.0;
    CHECK_THROWS_AS(separable_fit(bad, sizes), ApproximationDomainError);
}

TEST_CASE("separable fit is near the global log-space least-squares optimum") {
    const Patch patch = make_preset("distorted-2patch", {2, 4, 1}).domain.patch(0);
    const ElasticityCoefficients c;
    for (int l = 0; l < 2; ++l) {
        const CoefficientField cf = coefficient_tensor(patch, c, l);
        const Matrix diag = cf.diagonals();
        const std::vector<Index> sizes = cf.grid.sizes();
        const SeparableCoefficient fit = separable_fit(diag, sizes);
        // unknowns: a_0, a_1, b_0, b_1 stacked; one equation per (point, diagonal entry)
        const Index n0 = sizes[0], n1 = sizes[1], npts = cf.grid.total();
        Matrix Lsq = Matrix::Zero(2 * npts, 2 * (n0 + n1));
        Vector rhs(2 * npts);
        const Index a0 = 0, a1 = n0, b0 = n0 + n1, b1 = 2 * n0 + n1;
        for (Index g = 0; g < npts; ++g) {
            const auto q = cf.grid.multi(g);
            Lsq(2 * g, a0 + q[0]) = 1.0;
            Lsq(2 * g, b1 + q[1]) = 1.0;
            rhs[2 * g] = std::log(diag(g, 0));
            Lsq(2 * g + 1, a1 + q[1]) = 1.0;
            Lsq(2 * g + 1, b0 + q[0]) = 1.0;
            rhs[2 * g + 1] = std::log(diag(g, 1));
        }
        const Vector x = Lsq.completeOrthogonalDecomposition().solve(rhs);
        const double best = (Lsq * x - rhs).norm() / std::sqrt(double(2 * npts));
        CHECK(fit.residual <= best * 1.05 + 1e-14);
    }
}

TEST_CASE("geometry-inclusion blocks are exact on axis-aligned affine patches") {
    const ElasticityCoefficients c{0.9, 0.45};
    for (int d : {2, 3}) {
        Matrix S = Matrix::Zero(d, d);
        for (int l = 0; l < d; ++l) S(l, l) = 0.5 + l;
        const Patch patch = affine_patch(d, 2, std::vector<int>(static_cast<std::size_t>(d), 3), S, Vector::Ones(d));
        const SparseMatrix A = assemble_stiffness(patch, c);
        for (int l = 0; l < d; ++l) {
            const WeightedBlocks wb = weighted_blocks(patch, c, l);
            CHECK(wb.fit.residual < 1e-12);
            CHECK(oracle::rel_err(wb.stiffness().materialize(), Matrix(component_block(A, d, l, l))) < 1e-12);
        }
    }
}

TEST_CASE("coefficients are validated") {
    CHECK_THROWS_AS((ElasticityCoefficients{0.0, 0.0}.validate()), ArgumentError);
    CHECK_THROWS_AS((ElasticityCoefficients{-1.0, 1.0}.validate()), ArgumentError);
}

#include "afieti/verify.hpp"

#include "afieti/fdsolver.hpp"

#include <Eigen/Cholesky>

#include <random>

namespace afieti {

namespace {

Vector random_vector(std::mt19937_64& rng, Index n) {
    std::normal_distribution<double> dist;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

CheckResult check(std::string name, double value, double limit) {
    return {std::move(name), value <= limit, value, limit};
}

double projector_defect(const std::function<Vector(const Vector&)>& P, std::mt19937_64& rng, Index n) {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
        const Vector u = random_vector(rng, n), v = random_vector(rng, n);
        const Vector Pv = P(v), Pu = P(u);
        worst = std::max(worst, (P(Pv) - Pv).norm() / v.norm());
        worst = std::max(worst, std::abs(u.dot(Pv) - Pu.dot(v)) / (u.norm() * v.norm()));
    }
    return worst;
}

}  // namespace

std::vector<CheckResult> run_verification(const Problem& problem, Variant variant, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;
    const MultiPatch& mp = problem.domain;
    mp.validate();
    out.push_back(check("interfaces coincide", 0.0, 0.0));

    Discretization disc;
    discretize(problem, disc);
    const ConstraintSystem& cs = *disc.constraints;

    double rigid = 0.0;
    for (Index k = 0; k < mp.num_patches(); ++k) {
        const Matrix AR = disc.stiffness[static_cast<std::size_t>(k)] * cs.rigid(k);
        const double scale = disc.stiffness[static_cast<std::size_t>(k)].norm() * cs.rigid(k).norm();
        rigid = std::max(rigid, AR.norm() / scale);
    }
    out.push_back(check("rigid modes in ker A", rigid, 1e-10));

    out.push_back(check("P_chi projector", projector_defect([&](const Vector& v) { return cs.apply_P_chi(v); }, rng,
                                                            cs.num_constraints()),
                        1e-11));
    out.push_back(check("P_u projector", projector_defect([&](const Vector& v) { return cs.apply_P_u(v); }, rng,
                                                          cs.layout().total),
                        1e-11));
    const Vector lambda0 = cs.initial_multiplier(disc.f);
    const Vector rtf = cs.apply_Rt(disc.f);
    out.push_back(check("G^T lambda0 = R^T f", (cs.G().transpose() * lambda0 - rtf).norm() / std::max(rtf.norm(), 1e-300),
                        1e-11));

    // FD against a dense solve of the materialized target, first patch, first component
    {
        const Patch& patch = mp.patch(0);
        const ParametricBlocks blocks = parametric_blocks(patch);
        const FdFactorization fd = fd_setup_full(blocks, 0, problem.coeffs, disc.patches[0].H);
        double err = 0.0;
        if (fd.size() <= 4096) {
            const Matrix T = fd.materialize_target();
            const Vector r = random_vector(rng, fd.size());
            const Vector ref = T.llt().solve(r);
            err = (fd.apply(r) - ref).norm() / ref.norm();
        }
        out.push_back(check("fast diagonalization vs dense", err, 1e-9));
    }

    // exact Schur complement against dense elimination on the first patch
    {
        const IetiSolver solver(mp, problem.coeffs, disc.patches, cs, variant);
        const Matrix A = Matrix(disc.stiffness[0]);
        double err = 0.0;
        if (A.rows() <= 1500) {
            const IndexList& g = solver.gamma_indices(0);
            IndexList in;
            std::vector<bool> on(static_cast<std::size_t>(A.rows()), false);
            for (Index i : g) on[static_cast<std::size_t>(i)] = true;
            for (Index i = 0; i < A.rows(); ++i)
                if (!on[static_cast<std::size_t>(i)]) in.push_back(i);
            const Matrix S = A(g, g) - A(g, in) * A(in, in).llt().solve(Matrix(A(in, g)));
            const Vector t = random_vector(rng, static_cast<Index>(g.size()));
            const Vector ref = S * t;
            err = (solver.apply_exact_schur(0, t) - ref).norm() / ref.norm();
        }
        out.push_back(check("Schur complement vs dense elimination", err, 1e-9));
    }

    const IetiResult res = solve_ieti(disc, variant, 1e-8);
    out.push_back(check("MINRES converged", res.report.converged ? 0.0 : 1.0, 0.0));
    const Vector ref = solve_direct(disc);
    out.push_back(check("AF-IETI vs direct solve", (res.u - ref).norm() / ref.norm(), 1e-6));
    const ConstraintViolation cv = constraint_violation(mp, res.u, problem.exact.u);
    out.push_back(check("interface jump", cv.interface_jump, 1e-7));
    out.push_back(check("Dirichlet trace", cv.dirichlet_trace, 1e-7));
    return out;
}

}  // namespace afieti

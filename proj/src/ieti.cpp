#include "afieti/ieti.hpp"

#include "afieti/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace afieti {

Variant Variant::parse(const std::string& name) {
    const auto dash = name.rfind('-');
    if (dash == std::string::npos) throw ArgumentError("unknown variant '" + name + "'");
    const std::string solver = name.substr(0, dash), form = name.substr(dash + 1);
    Variant v;
    if (solver == "exact") {
        v.solver = LocalSolver::Exact;
    } else if (solver == "inexact") {
        v.solver = LocalSolver::Inexact;
    } else if (solver == "geo") {
        v.solver = LocalSolver::Geo;
    } else {
        throw ArgumentError("unknown variant '" + name + "'");
    }
    if (form == "nr") {
        v.nonredundant = true;
    } else if (form == "s") {
        v.nonredundant = false;
    } else {
        throw ArgumentError("unknown variant '" + name + "'");
    }
    return v;
}

std::string Variant::name() const {
    const char* s = solver == LocalSolver::Exact ? "exact" : solver == LocalSolver::Inexact ? "inexact" : "geo";
    return std::string(s) + (nonredundant ? "-nr" : "-s");
}

SparseMatrix submatrix(const SparseMatrix& A, const IndexList& rows, const IndexList& cols) {
    std::vector<Index> colpos(static_cast<std::size_t>(A.cols()), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) colpos[static_cast<std::size_t>(cols[j])] = static_cast<Index>(j);
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (SparseMatrix::InnerIterator it(A, rows[i]); it; ++it) {
            const Index j = colpos[static_cast<std::size_t>(it.col())];
            if (j >= 0) trip.emplace_back(static_cast<Index>(i), j, it.value());
        }
    SparseMatrix S(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

namespace {

std::shared_ptr<SparseLLT> factor(const SparseMatrix& A, const char* what) {
    auto llt = std::make_shared<SparseLLT>(Eigen::SparseMatrix<double>(A));
    if (llt->info() != Eigen::Success) throw NotPositiveDefinite(std::string("factorization failed: ") + what);
    return llt;
}

}  // namespace

IetiSolver::IetiSolver(const MultiPatch& mp, const ElasticityCoefficients& coeffs,
                       const std::vector<PatchSystem>& patches, const ConstraintSystem& constraints, Variant variant)
    : mp_(mp), coeffs_(coeffs), patches_(patches), cs_(constraints), variant_(variant) {
    coeffs_.validate();
    const int d = mp.dim();
    const Index np = mp.num_patches();
    if (static_cast<Index>(patches.size()) != np) throw ArgumentError("one patch system per patch is required");
    local_.resize(static_cast<std::size_t>(np));
    for (Index k = 0; k < np; ++k) {
        Local& L = local_[static_cast<std::size_t>(k)];
        const PatchSystem& ps = patches[static_cast<std::size_t>(k)];
        const DofPartition& part = cs_.partition(k);
        const Index n = part.num_dof;
        for (int c = 0; c < d; ++c) {
            for (Index i : part.gamma) L.gamma.push_back(c * n + i);
            for (Index i : part.interior) L.interior.push_back(c * n + i);
        }
        L.A_GG = submatrix(ps.A, L.gamma, L.gamma);
        L.A_GI = submatrix(ps.A, L.gamma, L.interior);
        L.A_IG = submatrix(ps.A, L.interior, L.gamma);
        const double H = ps.H;
        const Patch& patch = mp.patch(k);
        switch (variant_.solver) {
        case LocalSolver::Exact:
            L.PA = factor(SparseMatrix(ps.A + ps.M / (H * H)), "A + H^-2 M");
            if (!L.interior.empty()) L.AII = factor(submatrix(ps.A, L.interior, L.interior), "A_II");
            break;
        case LocalSolver::Inexact: {
            const ParametricBlocks blocks = parametric_blocks(patch);
            L.scale = std::pow(H, d - 2);
            for (int l = 0; l < d; ++l) {
                L.fd_full.push_back(fd_setup_full(blocks, l, coeffs_, H));
                if (!part.interior.empty()) L.fd_interior.push_back(fd_setup_interior(blocks, l, coeffs_));
                L.stiffness.push_back(blocks.stiffness(l, coeffs_));
            }
            break;
        }
        case LocalSolver::Geo: {
            for (int l = 0; l < d; ++l) {
                const WeightedBlocks wb = weighted_blocks(patch, coeffs_, l);
                const SparseMatrix All = component_block(ps.A, d, l, l);
                const SparseMatrix Mll = component_block(ps.M, d, l, l);
                const Vector phys = Vector(All.diagonal()) + Vector(Mll.diagonal()) / (H * H);
                L.fd_full.push_back(fd_setup_geo(wb, H, phys));
                if (!part.interior.empty()) L.fd_interior.push_back(fd_setup_geo_interior(wb));
                L.stiffness.push_back(wb.stiffness());
                const Vector approx = L.stiffness.back().diagonal();
                const Vector exact = All.diagonal();
                Vector s(part.gamma_size());
                for (Index g = 0; g < part.gamma_size(); ++g) {
                    const Index i = part.gamma[static_cast<std::size_t>(g)];
                    const double ratio = exact[i] / approx[i];
                    if (!(ratio > 0.0)) throw ScalingError("interface scaling diagonal must be positive");
                    s[g] = std::sqrt(ratio);
                }
                L.schur_scaling.push_back(std::move(s));
            }
            break;
        }
        }
    }
}

Vector IetiSolver::apply_exact_schur(Index k, const Vector& t) const {
    const Local& L = local_[static_cast<std::size_t>(k)];
    if (t.size() != static_cast<Index>(L.gamma.size())) throw ArgumentError("interface vector has the wrong length");
    Vector y = L.A_GG * t;
    if (!L.interior.empty()) {
        if (!L.AII) L.AII = factor(submatrix(patches_[static_cast<std::size_t>(k)].A, L.interior, L.interior), "A_II");
        const Vector z = L.AII->solve(Vector(L.A_IG * t));
        y -= L.A_GI * z;
    }
    return y;
}

Vector IetiSolver::apply_local_schur(Index k, const Vector& t) const {
    if (variant_.solver == LocalSolver::Exact) return apply_exact_schur(k, t);
    const Local& L = local_[static_cast<std::size_t>(k)];
    const DofPartition& part = cs_.partition(k);
    const int d = mp_.dim();
    const Index ng = part.gamma_size(), n = part.num_dof;
    if (t.size() != d * ng) throw ArgumentError("interface vector has the wrong length");
    const bool geo = variant_.solver == LocalSolver::Geo;
    Vector out(d * ng);
    for (int l = 0; l < d; ++l) {
        Vector tl = t.segment(l * ng, ng);
        if (geo) tl.array() *= L.schur_scaling[static_cast<std::size_t>(l)].array();
        Vector x = Vector::Zero(n);
        for (Index g = 0; g < ng; ++g) x[part.gamma[static_cast<std::size_t>(g)]] = tl[g];
        const KroneckerSum& Al = L.stiffness[static_cast<std::size_t>(l)];
        Vector y = Al.apply(x);
        if (!part.interior.empty()) {
            Vector yi(part.interior_size());
            for (Index i = 0; i < part.interior_size(); ++i) yi[i] = y[part.interior[static_cast<std::size_t>(i)]];
            const Vector z = L.fd_interior[static_cast<std::size_t>(l)].apply(yi);
            for (Index i = 0; i < part.interior_size(); ++i) x[part.interior[static_cast<std::size_t>(i)]] = -z[i];
            y = Al.apply(x);
        }
        Vector r(ng);
        for (Index g = 0; g < ng; ++g) r[g] = y[part.gamma[static_cast<std::size_t>(g)]];
        if (geo) {
            r.array() *= L.schur_scaling[static_cast<std::size_t>(l)].array();
        } else {
            r *= L.scale;
        }
        out.segment(l * ng, ng) = r;
    }
    return out;
}

Vector IetiSolver::apply_local_PA_inverse(Index k, const Vector& r) const {
    const Local& L = local_[static_cast<std::size_t>(k)];
    if (variant_.solver == LocalSolver::Exact) return L.PA->solve(r);
    const int d = mp_.dim();
    const Index n = cs_.partition(k).num_dof;
    if (r.size() != d * n) throw ArgumentError("patch vector has the wrong length");
    Vector out(d * n);
    for (int l = 0; l < d; ++l) out.segment(l * n, n) = L.fd_full[static_cast<std::size_t>(l)].apply(r.segment(l * n, n));
    return out;
}

Vector IetiSolver::apply_PA_inverse(const Vector& r) const {
    const auto& lay = cs_.layout();
    Vector out(lay.total);
    for (Index k = 0; k < lay.num_patches(); ++k) lay.segment(out, k) = apply_local_PA_inverse(k, Vector(lay.segment(r, k)));
    return out;
}

Vector IetiSolver::apply_PS(const Vector& lambda) const {
    const auto& lay = cs_.layout();
    const Vector lam = variant_.nonredundant ? cs_.solve_BBt(lambda) : lambda;
    const Vector v = cs_.B().transpose() * lam;
    Vector s = Vector::Zero(lay.total);
    for (Index k = 0; k < lay.num_patches(); ++k) {
        const Local& L = local_[static_cast<std::size_t>(k)];
        const Index off = lay.offset[static_cast<std::size_t>(k)];
        Vector t(static_cast<Index>(L.gamma.size()));
        for (std::size_t g = 0; g < L.gamma.size(); ++g) t[static_cast<Index>(g)] = v[off + L.gamma[g]];
        const Vector st = apply_local_schur(k, t);
        for (std::size_t g = 0; g < L.gamma.size(); ++g) s[off + L.gamma[g]] = st[static_cast<Index>(g)];
    }
    Vector out = cs_.B() * s;
    if (variant_.nonredundant) out = cs_.solve_BBt(out);
    return out;
}

Vector IetiSolver::apply_saddle(const Vector& x) const {
    const Index nw = primal_size(), nc = dual_size();
    if (x.size() != nw + nc) throw ArgumentError("saddle vector has the wrong length");
    const auto& lay = cs_.layout();
    const Vector w = x.head(nw);
    const Vector pchi = cs_.apply_P_chi(x.tail(nc));
    Vector y(nw + nc);
    for (Index k = 0; k < lay.num_patches(); ++k)
        y.segment(lay.offset[static_cast<std::size_t>(k)], lay.patch_size(k)) =
            patches_[static_cast<std::size_t>(k)].A * lay.segment(w, k);
    y.head(nw) += cs_.B().transpose() * pchi;
    y.tail(nc) = cs_.apply_P_chi(Vector(cs_.B() * w));
    return y;
}

Vector IetiSolver::apply_preconditioner(const Vector& x) const {
    const Index nw = primal_size(), nc = dual_size();
    if (x.size() != nw + nc) throw ArgumentError("saddle vector has the wrong length");
    Vector y(nw + nc);
    y.head(nw) = cs_.apply_P_u(apply_PA_inverse(cs_.apply_P_u(x.head(nw))));
    y.tail(nc) = cs_.apply_P_chi(apply_PS(cs_.apply_P_chi(x.tail(nc))));
    return y;
}

Vector IetiSolver::saddle_rhs(const Vector& f, const Vector& lambda0) const {
    Vector b(size());
    b.head(primal_size()) = cs_.apply_P_u(f - cs_.B().transpose() * lambda0);
    b.tail(dual_size()) = cs_.apply_P_chi(cs_.values());
    return b;
}

Matrix orthogonal_complement(const Matrix& V) {
    const Index n = V.rows(), r = V.cols();
    Eigen::HouseholderQR<Matrix> qr(V);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    const Vector diag = qr.matrixQR().diagonal().cwiseAbs();
    if (r > 0 && diag.minCoeff() <= 1e-10 * diag.maxCoeff()) throw NumericalFailure("subspace basis is rank deficient");
    return Q.rightCols(n - r);
}

SpectralEstimate spectral_probe(const IetiSolver& solver, const ConstraintSystem& cs, bool reverse_basis) {
    const Index nw = solver.primal_size(), nc = solver.dual_size();
    Matrix R = Matrix::Zero(nw, cs.num_rigid());
    for (Index k = 0; k < cs.layout().num_patches(); ++k) {
        const Matrix& Rk = cs.rigid(k);
        R.block(cs.layout().offset[static_cast<std::size_t>(k)], cs.rigid_offset(k), Rk.rows(), Rk.cols()) = Rk;
    }
    Matrix Q1 = orthogonal_complement(R);
    Matrix Q2 = orthogonal_complement(cs.G());
    if (reverse_basis) {
        Q1 = Q1.rowwise().reverse().eval();
        Q2 = Q2.rowwise().reverse().eval();
    }
    const Index m1 = Q1.cols(), m2 = Q2.cols(), m = m1 + m2;
    Matrix Q = Matrix::Zero(nw + nc, m);
    Q.topLeftCorner(nw, m1) = Q1;
    Q.bottomRightCorner(nc, m2) = Q2;
    Matrix AQ(nw + nc, m), BQ(nw + nc, m);
    for (Index j = 0; j < m; ++j) {
        const Vector q = Q.col(j);
        AQ.col(j) = solver.apply_saddle(q);
        BQ.col(j) = solver.apply_preconditioner(q);
    }
    Matrix Ar = Q.transpose() * AQ;
    Matrix Br = Q.transpose() * BQ;
    Ar = 0.5 * (Ar + Ar.transpose()).eval();
    Br = 0.5 * (Br + Br.transpose()).eval();
    Eigen::LLT<Matrix> llt(Br);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("preconditioner is not definite on the constrained subspace");
    const Matrix L = llt.matrixL();
    const Matrix C = L.transpose() * Ar * L;
    Eigen::SelfAdjointEigenSolver<Matrix> es(C, Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues().cwiseAbs();
    SpectralEstimate out;
    out.lambda_min = ev.minCoeff();
    out.lambda_max = ev.maxCoeff();
    out.kappa = out.lambda_max / out.lambda_min;
    return out;
}

}  // namespace afieti

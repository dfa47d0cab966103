#include "afieti/constraints.hpp"

#include "afieti/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace afieti {

DofLayout::DofLayout(const MultiPatch& mp) : dim(mp.dim()) {
    Index at = 0;
    for (const auto& p : mp.patches()) {
        offset.push_back(at);
        nscalar.push_back(p.num_basis());
        at += dim * p.num_basis();
    }
    total = at;
}

Matrix rigid_modes(const Patch& patch) {
    const int d = patch.dim();
    const Index n = patch.num_basis();
    const Matrix& X = patch.control();
    const int nr = d * (d + 1) / 2;
    Matrix R = Matrix::Zero(d * n, nr);
    for (int c = 0; c < d; ++c) R.col(c).segment(c * n, n).setOnes();
    // infinitesimal rotations: u = omega x (x), one column per rotation plane (a, b): u_a = -x_b, u_b = x_a
    const int planes[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    const int count = d == 2 ? 1 : 3;
    for (int r = 0; r < count; ++r) {
        const int a = planes[r][0], b = planes[r][1];
        R.col(d + r).segment(a * n, n) = -X.col(b);
        R.col(d + r).segment(b * n, n) = X.col(a);
    }
    return R;
}

namespace {

struct ScalarRow {
    RowKind kind;
    int patch;
    Index dof;
    int interface;
    std::vector<std::tuple<int, Index, double>> terms;  // (patch, scalar dof, weight)
};

class UnionFind {
public:
    explicit UnionFind(Index n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), Index{0}); }
    Index find(Index x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
            x = parent_[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }

private:
    std::vector<Index> parent_;
};

}  // namespace

void ConstraintSystem::build_rows(const MultiPatch& mp, const std::function<Vector(const Vector&)>& dirichlet) {
    const int d = mp.dim();
    const Index np = mp.num_patches();

    // scalar numbering across patches for union-find
    std::vector<Index> soff(static_cast<std::size_t>(np) + 1, 0);
    for (Index k = 0; k < np; ++k) soff[static_cast<std::size_t>(k + 1)] = soff[static_cast<std::size_t>(k)] + mp.patch(k).num_basis();
    auto key = [&](int k, Index i) { return soff[static_cast<std::size_t>(k)] + i; };

    std::vector<std::vector<bool>> pinned(static_cast<std::size_t>(np));
    std::vector<Matrix> gval(static_cast<std::size_t>(np));
    for (Index k = 0; k < np; ++k) {
        pinned[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(mp.patch(k).num_basis()), false);
        gval[static_cast<std::size_t>(k)] = Matrix::Zero(mp.patch(k).num_basis(), d);
    }
    for (const auto& bf : mp.boundary()) {
        if (bf.type != BoundaryType::Dirichlet) continue;
        const Patch& patch = mp.patch(bf.patch);
        const IndexList dofs = face_dofs(patch, bf.face);
        for (Index i : dofs) pinned[static_cast<std::size_t>(bf.patch)][static_cast<std::size_t>(i)] = true;
        if (dirichlet) {
            std::vector<SplineBasis> tb;
            for (int t : face_tangents(d, bf.face)) tb.push_back(patch.basis(t));
            const int face = bf.face;
            const Matrix coeffs = interpolate_coefficients(
                tb, [&](const Vector& s) { return dirichlet(patch.map_point(face_point(d, face, s))); }, d);
            for (std::size_t a = 0; a < dofs.size(); ++a) gval[static_cast<std::size_t>(bf.patch)].row(dofs[a]) = coeffs.row(static_cast<Index>(a));
        }
    }
    pinned_.assign(static_cast<std::size_t>(np), IndexList());
    for (Index k = 0; k < np; ++k)
        for (Index i = 0; i < mp.patch(k).num_basis(); ++i)
            if (pinned[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) pinned_[static_cast<std::size_t>(k)].push_back(i);

    auto all_pinned = [&](const ScalarRow& r) {
        for (const auto& [k, i, w] : r.terms)
            if (!pinned[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) return false;
        return true;
    };

    std::vector<ScalarRow> scalar;
    // conforming classes, chained in ascending (patch, dof) order
    UnionFind uf(soff.back());
    std::vector<bool> coupled(static_cast<std::size_t>(soff.back()), false);
    std::vector<InterfaceCoupling> couplings;
    for (const auto& iface : mp.interfaces()) couplings.push_back(match_interface_dofs(mp, iface));
    for (std::size_t f = 0; f < mp.interfaces().size(); ++f) {
        const auto& iface = mp.interfaces()[f];
        if (iface.nesting != Nesting::Conforming) continue;
        const auto& cp = couplings[f];
        for (std::size_t j = 0; j < cp.slave_dofs.size(); ++j) {
            const Index s = key(iface.patch_b, cp.slave_dofs[j]);
            const Index m = key(iface.patch_a, cp.weights[j].front().first);
            uf.unite(s, m);
            coupled[static_cast<std::size_t>(s)] = coupled[static_cast<std::size_t>(m)] = true;
        }
    }
    std::vector<std::vector<Index>> classes(static_cast<std::size_t>(soff.back()));
    for (Index x = 0; x < soff.back(); ++x)
        if (coupled[static_cast<std::size_t>(x)]) classes[static_cast<std::size_t>(uf.find(x))].push_back(x);
    auto unkey = [&](Index x) {
        const auto it = std::upper_bound(soff.begin(), soff.end(), x);
        const int k = static_cast<int>(it - soff.begin()) - 1;
        return std::pair<int, Index>(k, x - soff[static_cast<std::size_t>(k)]);
    };
    for (const auto& cls : classes) {
        if (cls.size() < 2) continue;
        // conforming traces share the Dirichlet interpolant; copy for bitwise agreement
        const auto [k0, i0] = unkey(cls.front());
        for (const Index x : cls) {
            const auto [k, i] = unkey(x);
            if (pinned[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] && pinned[static_cast<std::size_t>(k0)][static_cast<std::size_t>(i0)])
                gval[static_cast<std::size_t>(k)].row(i) = gval[static_cast<std::size_t>(k0)].row(i0);
        }
        for (std::size_t t = 0; t + 1 < cls.size(); ++t) {
            const auto [ka, ia] = unkey(cls[t]);
            const auto [kb, ib] = unkey(cls[t + 1]);
            ScalarRow r{RowKind::Continuity, kb, ib, -1, {{ka, ia, 1.0}, {kb, ib, -1.0}}};
            if (!all_pinned(r)) scalar.push_back(std::move(r));
        }
    }
    // nested interfaces: one row per refined-side DOF
    for (std::size_t f = 0; f < mp.interfaces().size(); ++f) {
        const auto& iface = mp.interfaces()[f];
        if (iface.nesting != Nesting::Nested) continue;
        const auto& cp = couplings[f];
        for (std::size_t j = 0; j < cp.slave_dofs.size(); ++j) {
            const Index s = cp.slave_dofs[j];
            ScalarRow r{RowKind::Continuity, iface.patch_b, s, static_cast<int>(f), {{iface.patch_b, s, 1.0}}};
            for (const auto& [m, w] : cp.weights[j]) r.terms.emplace_back(iface.patch_a, m, -w);
            if (all_pinned(r)) {
                Vector v = Vector::Zero(d);
                for (const auto& [m, w] : cp.weights[j]) v += w * gval[static_cast<std::size_t>(iface.patch_a)].row(m).transpose();
                gval[static_cast<std::size_t>(iface.patch_b)].row(s) = v.transpose();
            } else {
                scalar.push_back(std::move(r));
            }
        }
    }
    // Dirichlet rows
    for (Index k = 0; k < np; ++k)
        for (Index i : pinned_[static_cast<std::size_t>(k)])
            scalar.push_back({RowKind::Dirichlet, static_cast<int>(k), i, -1, {{static_cast<int>(k), i, 1.0}}});

    const Index ns = static_cast<Index>(scalar.size());
    std::vector<Triplet> trip;
    rows_.clear();
    c_ = Vector::Zero(d * ns);
    for (int c = 0; c < d; ++c) {
        for (Index r = 0; r < ns; ++r) {
            const auto& sr = scalar[static_cast<std::size_t>(r)];
            const Index row = c * ns + r;
            for (const auto& [k, i, w] : sr.terms) trip.emplace_back(row, layout_.global(k, c, i), w);
            rows_.push_back({sr.kind, c, sr.patch, sr.dof, sr.interface});
            if (sr.kind == RowKind::Dirichlet) c_[row] = gval[static_cast<std::size_t>(sr.patch)](sr.dof, c);
        }
    }
    B_.resize(d * ns, layout_.total);
    B_.setFromTriplets(trip.begin(), trip.end());
}

ConstraintSystem::ConstraintSystem(const MultiPatch& mp, const std::vector<SparseMatrix>& stiffness,
                                   const std::function<Vector(const Vector&)>& dirichlet)
    : layout_(mp) {
    const Index np = mp.num_patches();
    if (static_cast<Index>(stiffness.size()) != np) throw ArgumentError("one stiffness matrix per patch is required");
    for (Index k = 0; k < np; ++k) parts_.push_back(partition_dofs(mp.patch(k)));
    build_rows(mp, dirichlet);

    // non-redundancy: B B^T must be nonsingular
    const Eigen::SparseMatrix<double> BBt = Eigen::SparseMatrix<double>(B_ * SparseMatrix(B_.transpose()));
    BBt_ = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(BBt);
    if (BBt_->info() != Eigen::Success) throw RedundantConstraints("B B^T is singular: constraint rows are redundant");
    {
        const Eigen::SparseMatrix<double> L = BBt_->matrixL();
        const Vector diag = L.diagonal();
        if (diag.size() > 0 && diag.minCoeff() <= 1e-7 * diag.maxCoeff())
            throw RedundantConstraints("B B^T is numerically singular: constraint rows are redundant");
    }

    roff_.assign(1, 0);
    for (Index k = 0; k < np; ++k) {
        Matrix R = rigid_modes(mp.patch(k));
        const SparseMatrix& A = stiffness[static_cast<std::size_t>(k)];
        if (A.rows() != R.rows()) throw ArgumentError("stiffness matrix size does not match the patch");
        const double anorm = A.norm();
        for (Index j = 0; j < R.cols(); ++j) {
            const double res = (A * R.col(j)).norm();
            if (res > 1e-10 * anorm * R.col(j).norm())
                throw RigidModeError("rigid-body mode is not in the stiffness kernel on patch " + std::to_string(k));
        }
        RtR_.emplace_back(R.transpose() * R);
        roff_.push_back(roff_.back() + R.cols());
        R_.push_back(std::move(R));
    }

    // G = B R column block per patch
    std::vector<Index> patch_of(static_cast<std::size_t>(layout_.total));
    for (Index k = 0; k < np; ++k)
        for (Index g = 0; g < layout_.patch_size(k); ++g) patch_of[static_cast<std::size_t>(layout_.offset[static_cast<std::size_t>(k)] + g)] = k;
    G_ = Matrix::Zero(B_.rows(), num_rigid());
    for (Index r = 0; r < B_.rows(); ++r) {
        for (SparseMatrix::InnerIterator it(B_, r); it; ++it) {
            const Index k = patch_of[static_cast<std::size_t>(it.col())];
            const Matrix& Rk = R_[static_cast<std::size_t>(k)];
            G_.row(r).segment(roff_[static_cast<std::size_t>(k)], Rk.cols()) +=
                it.value() * Rk.row(it.col() - layout_.offset[static_cast<std::size_t>(k)]);
        }
    }
    try {
        GtG_ = DenseCholesky(G_.transpose() * G_);
    } catch (const NotPositiveDefinite&) {
        throw SingularMatrix("G^T G is singular: a rigid-body motion satisfies all constraints");
    }
}

Vector ConstraintSystem::apply_R(const Vector& alpha) const {
    Vector w(layout_.total);
    for (Index k = 0; k < layout_.num_patches(); ++k) {
        const Matrix& Rk = R_[static_cast<std::size_t>(k)];
        layout_.segment(w, k) = Rk * alpha.segment(roff_[static_cast<std::size_t>(k)], Rk.cols());
    }
    return w;
}

Vector ConstraintSystem::apply_Rt(const Vector& w) const {
    Vector a(num_rigid());
    for (Index k = 0; k < layout_.num_patches(); ++k) {
        const Matrix& Rk = R_[static_cast<std::size_t>(k)];
        a.segment(roff_[static_cast<std::size_t>(k)], Rk.cols()) = Rk.transpose() * layout_.segment(w, k);
    }
    return a;
}

Vector ConstraintSystem::apply_P_chi(const Vector& v) const {
    const Vector y = GtG_.solve(Vector(G_.transpose() * v));
    return v - G_ * y;
}

Vector ConstraintSystem::apply_P_u(const Vector& w) const {
    Vector out = w;
    for (Index k = 0; k < layout_.num_patches(); ++k) {
        const Matrix& Rk = R_[static_cast<std::size_t>(k)];
        const Vector seg = layout_.segment(w, k);
        const Vector y = RtR_[static_cast<std::size_t>(k)].solve(Vector(Rk.transpose() * seg));
        layout_.segment(out, k) -= Rk * y;
    }
    return out;
}

Vector ConstraintSystem::initial_multiplier(const Vector& f) const {
    return G_ * GtG_.solve(apply_Rt(f));
}

void ConstraintSystem::recover_solution(const Vector& w, const Vector& chi, const Vector& lambda0, Vector& u,
                                        Vector& lambda) const {
    const Vector resid = c_ - B_ * w;
    const Vector alpha = GtG_.solve(Vector(G_.transpose() * resid));
    u = w + apply_R(alpha);
    lambda = lambda0 + chi;
}

Vector ConstraintSystem::solve_BBt(const Vector& v) const { return BBt_->solve(v); }

}  // namespace afieti

#include "afieti/monolithic.hpp"

#include "afieti/error.hpp"

#include <Eigen/SparseCholesky>

#include <map>
#include <numeric>

namespace afieti {

namespace {

struct Affine {
    std::map<Index, double> terms;  // free scalar index -> weight
    Vector constant;
};

}  // namespace

ReducedBasis reduced_basis(const MultiPatch& mp, const std::function<Vector(const Vector&)>& dirichlet) {
    const int d = mp.dim();
    const Index np = mp.num_patches();
    std::vector<Index> off(static_cast<std::size_t>(np) + 1, 0);
    for (Index k = 0; k < np; ++k) off[static_cast<std::size_t>(k + 1)] = off[static_cast<std::size_t>(k)] + mp.patch(k).num_basis();
    const Index n = off.back();
    auto key = [&](Index k, Index i) { return off[static_cast<std::size_t>(k)] + i; };

    // Dirichlet coefficients per scalar function
    std::vector<bool> pinned(static_cast<std::size_t>(n), false);
    Matrix gval = Matrix::Zero(n, d);
    for (const auto& bf : mp.boundary()) {
        if (bf.type != BoundaryType::Dirichlet) continue;
        const Patch& patch = mp.patch(bf.patch);
        const IndexList dofs = face_dofs(patch, bf.face);
        Matrix coeffs = Matrix::Zero(static_cast<Index>(dofs.size()), d);
        if (dirichlet) {
            std::vector<SplineBasis> tb;
            for (int t : face_tangents(d, bf.face)) tb.push_back(patch.basis(t));
            coeffs = interpolate_coefficients(
                tb, [&](const Vector& s) { return dirichlet(patch.map_point(face_point(d, bf.face, s))); }, d);
        }
        for (std::size_t a = 0; a < dofs.size(); ++a) {
            pinned[static_cast<std::size_t>(key(bf.patch, dofs[a]))] = true;
            gval.row(key(bf.patch, dofs[a])) = coeffs.row(static_cast<Index>(a));
        }
    }

    // conforming identification by a plain parent forest
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto root = [&](Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    std::vector<std::vector<std::pair<Index, double>>> slave(static_cast<std::size_t>(n));
    std::vector<bool> is_slave(static_cast<std::size_t>(n), false);
    for (const auto& iface : mp.interfaces()) {
        const InterfaceCoupling cp = match_interface_dofs(mp, iface);
        for (std::size_t j = 0; j < cp.slave_dofs.size(); ++j) {
            const Index s = key(iface.patch_b, cp.slave_dofs[j]);
            if (iface.nesting == Nesting::Conforming) {
                const Index a = root(s), b = root(key(iface.patch_a, cp.weights[j].front().first));
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            } else {
                is_slave[static_cast<std::size_t>(s)] = true;
                for (const auto& [m, w] : cp.weights[j]) slave[static_cast<std::size_t>(s)].emplace_back(key(iface.patch_a, m), w);
            }
        }
    }
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(n));
    for (Index x = 0; x < n; ++x) members[static_cast<std::size_t>(root(x))].push_back(x);

    // resolve each class once, recursively through nested masters
    std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 new, 1 in progress, 2 done
    std::vector<Affine> rep(static_cast<std::size_t>(n));
    Index nfree = 0;
    std::function<const Affine&(Index)> resolve = [&](Index x) -> const Affine& {
        const Index r = root(x);
        auto& st = state[static_cast<std::size_t>(r)];
        if (st == 2) return rep[static_cast<std::size_t>(r)];
        if (st == 1) throw GeometryMismatch("cyclic interface nesting");
        st = 1;
        const auto& cls = members[static_cast<std::size_t>(r)];
        Affine a;
        a.constant = Vector::Zero(d);
        Index pinned_member = -1, slave_member = -1;
        for (Index y : cls) {
            if (pinned[static_cast<std::size_t>(y)] && pinned_member < 0) pinned_member = y;
            if (is_slave[static_cast<std::size_t>(y)] && slave_member < 0) slave_member = y;
        }
        if (slave_member >= 0) {
            bool all_const = true;
            for (const auto& [m, w] : slave[static_cast<std::size_t>(slave_member)]) {
                const Affine& am = resolve(m);
                a.constant += w * am.constant;
                for (const auto& [j, v] : am.terms) a.terms[j] += w * v;
                all_const = all_const && am.terms.empty();
            }
            if (pinned_member >= 0 && !all_const)
                throw GeometryMismatch("pinned refined-side function with free coarse masters");
        } else if (pinned_member >= 0) {
            a.constant = gval.row(pinned_member).transpose();
        } else {
            a.terms[nfree++] = 1.0;
        }
        rep[static_cast<std::size_t>(r)] = std::move(a);
        st = 2;
        return rep[static_cast<std::size_t>(r)];
    };
    for (Index x = 0; x < n; ++x) resolve(x);

    ReducedBasis rb;
    rb.num_free = nfree;
    Index total = d * n;
    rb.u0 = Vector::Zero(total);
    std::vector<Triplet> trip;
    for (Index k = 0; k < np; ++k) {
        const Index nk = mp.patch(k).num_basis();
        for (Index i = 0; i < nk; ++i) {
            const Affine& a = rep[static_cast<std::size_t>(root(key(k, i)))];
            for (int c = 0; c < d; ++c) {
                const Index g = d * off[static_cast<std::size_t>(k)] + c * nk + i;
                rb.u0[g] = a.constant[c];
                for (const auto& [j, w] : a.terms)
                    if (w != 0.0) trip.emplace_back(g, c * nfree + j, w);
            }
        }
    }
    rb.E.resize(total, d * nfree);
    rb.E.setFromTriplets(trip.begin(), trip.end());
    return rb;
}

Vector monolithic_solve(const MultiPatch& mp, const std::vector<SparseMatrix>& stiffness, const Vector& f,
                        const std::function<Vector(const Vector&)>& dirichlet) {
    const ReducedBasis rb = reduced_basis(mp, dirichlet);
    const Index total = rb.E.rows();
    if (f.size() != total || static_cast<Index>(stiffness.size()) != mp.num_patches())
        throw ArgumentError("load or stiffness list does not match the multipatch");
    std::vector<Triplet> trip;
    Index o = 0;
    for (const auto& A : stiffness) {
        for (Index r = 0; r < A.outerSize(); ++r)
            for (SparseMatrix::InnerIterator it(A, r); it; ++it) trip.emplace_back(o + it.row(), o + it.col(), it.value());
        o += A.rows();
    }
    if (o != total) throw ArgumentError("stiffness sizes do not match the multipatch");
    Eigen::SparseMatrix<double> A(total, total);
    A.setFromTriplets(trip.begin(), trip.end());
    const Eigen::SparseMatrix<double> E = rb.E;
    const Eigen::SparseMatrix<double> K = E.transpose() * A * E;
    const Vector rhs = E.transpose() * (f - A * rb.u0);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> llt(K);
    if (llt.info() != Eigen::Success) throw SingularMatrix("reduced global stiffness is singular");
    const Vector y = llt.solve(rhs);
    return E * y + rb.u0;
}

}  // namespace afieti

#include "afieti/geometry.hpp"

#include "afieti/dense_la.hpp"
#include "afieti/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace afieti {

namespace {

std::vector<Index> basis_sizes(const std::vector<SplineBasis>& bases) {
    std::vector<Index> s;
    for (const auto& b : bases) s.push_back(b.size());
    return s;
}

std::string face_name(int patch, int face) {
    return "patch " + std::to_string(patch) + " face " + std::to_string(face);
}

}  // namespace

Patch::Patch(std::vector<SplineBasis> bases, Matrix control)
    : bases_(std::move(bases)), control_(std::move(control)), map_(basis_sizes(bases_)) {
    if (bases_.size() < 2 || bases_.size() > 3) throw ArgumentError("patches must be 2D or 3D");
    if (control_.rows() != map_.total() || control_.cols() != dim())
        throw ArgumentError("control net shape does not match the bases");
}

Vector Patch::map_point(const Vector& eta) const {
    const PointBasis pb = eval_point(*this, eta);
    Vector x = Vector::Zero(dim());
    for (std::size_t a = 0; a < pb.indices.size(); ++a)
        x += pb.table(0, static_cast<Index>(a)) * control_.row(pb.indices[a]).transpose();
    return x;
}

Matrix interpolate_coefficients(const std::vector<SplineBasis>& bases,
                                const std::function<Vector(const Vector&)>& g, int components) {
    const int d = static_cast<int>(bases.size());
    std::vector<std::vector<double>> grev;
    std::vector<Matrix> inverses;
    for (const auto& b : bases) {
        grev.push_back(b.greville());
        const Matrix C = collocation_matrix(b, grev.back());
        inverses.push_back(DenseLU(C).solve(Matrix(Matrix::Identity(C.rows(), C.cols()))));
    }
    const MultiIndexMap map(basis_sizes(bases));
    Matrix values(map.total(), components);
    Vector eta(d);
    for (Index i = 0; i < map.total(); ++i) {
        const auto mi = map.multi(i);
        for (int l = 0; l < d; ++l) eta[l] = grev[static_cast<std::size_t>(l)][static_cast<std::size_t>(mi[static_cast<std::size_t>(l)])];
        const Vector v = g(eta);
        if (v.size() != components) throw ArgumentError("interpolated function has the wrong number of components");
        values.row(i) = v.transpose();
    }
    Matrix coeffs(map.total(), components);
    for (int c = 0; c < components; ++c) coeffs.col(c) = kron_apply(inverses, values.col(c));
    return coeffs;
}

Patch interpolate_patch(std::vector<SplineBasis> bases, const std::function<Vector(const Vector&)>& F) {
    const int d = static_cast<int>(bases.size());
    Matrix control = interpolate_coefficients(bases, F, d);
    return Patch(std::move(bases), std::move(control));
}

PointBasis eval_point(const Patch& patch, const Vector& eta) {
    const int d = patch.dim();
    if (eta.size() != d) throw ArgumentError("parametric point has the wrong dimension");
    std::vector<BasisDerivatives> dir(static_cast<std::size_t>(d));
    Index count = 1;
    for (int l = 0; l < d; ++l) {
        dir[static_cast<std::size_t>(l)] = eval_basis_derivatives(patch.basis(l), eta[l], 1);
        count *= patch.basis(l).degree() + 1;
    }
    PointBasis out;
    out.indices.resize(static_cast<std::size_t>(count));
    out.table.resize(d + 1, count);
    const auto& map = patch.index_map();
    for (Index a = 0; a < count; ++a) {
        Index rem = a, lin = 0;
        double val = 1.0;
        Vector grad = Vector::Ones(d);
        for (int l = 0; l < d; ++l) {
            const auto& D = dir[static_cast<std::size_t>(l)];
            const Index np = D.table.cols();
            const Index k = rem % np;
            rem /= np;
            lin += (D.first + k) * map.stride(l);
            val *= D.table(0, k);
            for (int m = 0; m < d; ++m) grad[m] *= (m == l) ? D.table(1, k) : D.table(0, k);
        }
        out.indices[static_cast<std::size_t>(a)] = lin;
        out.table(0, a) = val;
        out.table.block(1, a, d, 1) = grad;
    }
    return out;
}

JacobianInfo jacobian(const Patch& patch, const Vector& eta) {
    const int d = patch.dim();
    const PointBasis pb = eval_point(patch, eta);
    JacobianInfo info;
    info.J = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < pb.indices.size(); ++a) {
        info.J += patch.control().row(pb.indices[a]).transpose() *
                  pb.table.block(1, static_cast<Index>(a), d, 1).transpose();
    }
    info.det = info.J.determinant();
    if (!(std::abs(info.det) >= 1e-14)) throw SingularGeometry("singular Jacobian in patch parametrization");
    info.inverse = info.J.inverse();
    return info;
}

double patch_diameter(const Patch& patch) {
    const Matrix& P = patch.control();
    double best = 0.0;
    for (Index i = 0; i < P.rows(); ++i)
        for (Index j = i + 1; j < P.rows(); ++j) best = std::max(best, (P.row(i) - P.row(j)).squaredNorm());
    return std::sqrt(best);
}

std::vector<int> face_tangents(int dim, int face) {
    std::vector<int> t;
    for (int l = 0; l < dim; ++l)
        if (l != face_direction(face)) t.push_back(l);
    return t;
}

Vector face_point(int dim, int face, const Vector& s) {
    const auto t = face_tangents(dim, face);
    if (s.size() != static_cast<Index>(t.size())) throw ArgumentError("face coordinate has the wrong dimension");
    Vector eta(dim);
    eta[face_direction(face)] = face_side(face);
    for (std::size_t k = 0; k < t.size(); ++k) eta[t[k]] = s[static_cast<Index>(k)];
    return eta;
}

IndexList face_dofs(const Patch& patch, int face) {
    const int d = patch.dim();
    if (face < 0 || face >= 2 * d) throw ArgumentError("face index out of range");
    const auto t = face_tangents(d, face);
    const auto& map = patch.index_map();
    const int dir = face_direction(face);
    const Index fixed = face_side(face) == 0 ? 0 : map.size(dir) - 1;
    std::vector<Index> tsizes;
    for (int l : t) tsizes.push_back(map.size(l));
    const MultiIndexMap fmap(tsizes);
    IndexList out(static_cast<std::size_t>(fmap.total()));
    std::vector<Index> mi(static_cast<std::size_t>(d));
    for (Index k = 0; k < fmap.total(); ++k) {
        const auto fi = fmap.multi(k);
        mi[static_cast<std::size_t>(dir)] = fixed;
        for (std::size_t a = 0; a < t.size(); ++a) mi[static_cast<std::size_t>(t[a])] = fi[a];
        out[static_cast<std::size_t>(k)] = map.linear(mi);
    }
    return out;
}

Orientation Orientation::identity(int face_dim) {
    Orientation o;
    for (int t = 0; t < face_dim; ++t) {
        o.perm.push_back(t);
        o.flip.push_back(false);
    }
    return o;
}

Orientation Orientation::inverse() const {
    Orientation o;
    o.perm.assign(perm.size(), 0);
    o.flip.assign(flip.size(), false);
    for (std::size_t t = 0; t < perm.size(); ++t) {
        o.perm[static_cast<std::size_t>(perm[t])] = static_cast<int>(t);
        o.flip[static_cast<std::size_t>(perm[t])] = flip[t];
    }
    return o;
}

Vector Orientation::apply(const Vector& s_a) const {
    Vector s_b(s_a.size());
    for (std::size_t t = 0; t < perm.size(); ++t) {
        const double v = s_a[static_cast<Index>(t)];
        s_b[perm[t]] = flip[t] ? 1.0 - v : v;
    }
    return s_b;
}

int MultiPatch::add_patch(Patch patch) {
    if (patch.dim() != dim_) throw ArgumentError("patch dimension differs from the domain dimension");
    patches_.push_back(std::move(patch));
    return static_cast<int>(patches_.size()) - 1;
}

void MultiPatch::add_interface(Interface iface, int fine_side) {
    const int n = static_cast<int>(patches_.size());
    if (iface.patch_a < 0 || iface.patch_a >= n || iface.patch_b < 0 || iface.patch_b >= n || iface.patch_a == iface.patch_b)
        throw ArgumentError("interface references an invalid patch");
    if (iface.face_a < 0 || iface.face_a >= 2 * dim_ || iface.face_b < 0 || iface.face_b >= 2 * dim_)
        throw ArgumentError("interface references an invalid face");
    const std::size_t fd = static_cast<std::size_t>(dim_ - 1);
    if (iface.orientation.perm.size() != fd || iface.orientation.flip.size() != fd)
        throw ArgumentError("interface orientation has the wrong dimension");
    std::vector<int> check = iface.orientation.perm;
    std::sort(check.begin(), check.end());
    for (std::size_t t = 0; t < fd; ++t)
        if (check[t] != static_cast<int>(t)) throw ArgumentError("interface orientation is not a permutation");
    if (fine_side == 0) {
        std::swap(iface.patch_a, iface.patch_b);
        std::swap(iface.face_a, iface.face_b);
        iface.orientation = iface.orientation.inverse();
    }
    interfaces_.push_back(std::move(iface));
}

void MultiPatch::set_boundary(int patch, int face, BoundaryType type) {
    if (patch < 0 || patch >= static_cast<int>(patches_.size()) || face < 0 || face >= 2 * dim_)
        throw ArgumentError("boundary tag references an invalid face");
    for (auto& b : boundary_) {
        if (b.patch == patch && b.face == face) {
            b.type = type;
            return;
        }
    }
    boundary_.push_back({patch, face, type});
}

bool MultiPatch::is_interface_face(int patch, int face) const {
    for (const auto& i : interfaces_)
        if ((i.patch_a == patch && i.face_a == face) || (i.patch_b == patch && i.face_b == face)) return true;
    return false;
}

BoundaryType MultiPatch::boundary_type(int patch, int face) const {
    for (const auto& b : boundary_)
        if (b.patch == patch && b.face == face) return b.type;
    throw ArgumentError(face_name(patch, face) + " carries no boundary tag");
}

void MultiPatch::validate(double tol) const {
    const int np = static_cast<int>(patches_.size());
    std::vector<int> uses(static_cast<std::size_t>(np * 2 * dim_), 0);
    auto mark = [&](int p, int f) { ++uses[static_cast<std::size_t>(p * 2 * dim_ + f)]; };
    for (const auto& i : interfaces_) {
        mark(i.patch_a, i.face_a);
        mark(i.patch_b, i.face_b);
    }
    for (const auto& b : boundary_) mark(b.patch, b.face);
    for (int p = 0; p < np; ++p)
        for (int f = 0; f < 2 * dim_; ++f)
            if (uses[static_cast<std::size_t>(p * 2 * dim_ + f)] != 1)
                throw GeometryMismatch(face_name(p, f) + " must be on exactly one interface or boundary tag");

    const int samples = 10;
    for (const auto& i : interfaces_) {
        const Patch& a = patch(i.patch_a);
        const Patch& b = patch(i.patch_b);
        const Index count = dim_ == 2 ? samples : samples * samples;
        for (Index k = 0; k < count; ++k) {
            Vector s(dim_ - 1);
            s[0] = (static_cast<double>(k % samples) + 0.5) / samples;
            if (dim_ == 3) s[1] = (static_cast<double>(k / samples) + 0.5) / samples;
            const Vector xa = a.map_point(face_point(dim_, i.face_a, s));
            const Vector xb = b.map_point(face_point(dim_, i.face_b, i.orientation.apply(s)));
            if ((xa - xb).norm() > tol * std::max(1.0, xa.norm()))
                throw GeometryMismatch("interface between " + face_name(i.patch_a, i.face_a) + " and " +
                                       face_name(i.patch_b, i.face_b) + " does not match geometrically");
        }
    }
}

DofPartition partition_dofs(const Patch& patch) {
    const auto& map = patch.index_map();
    DofPartition part;
    part.num_dof = map.total();
    part.position.assign(static_cast<std::size_t>(part.num_dof), 0);
    part.on_gamma.assign(static_cast<std::size_t>(part.num_dof), false);
    for (Index i = 0; i < part.num_dof; ++i) {
        const auto mi = map.multi(i);
        bool boundary = false;
        for (int l = 0; l < patch.dim(); ++l) {
            const Index v = mi[static_cast<std::size_t>(l)];
            if (v == 0 || v == map.size(l) - 1) boundary = true;
        }
        part.on_gamma[static_cast<std::size_t>(i)] = boundary;
        if (boundary) {
            part.position[static_cast<std::size_t>(i)] = static_cast<Index>(part.gamma.size());
            part.gamma.push_back(i);
        } else {
            part.position[static_cast<std::size_t>(i)] = static_cast<Index>(part.interior.size());
            part.interior.push_back(i);
        }
    }
    return part;
}

InterfaceCoupling match_interface_dofs(const MultiPatch& mp, const Interface& iface) {
    const int d = mp.dim();
    const Patch& master = mp.patch(iface.patch_a);
    const Patch& slave = mp.patch(iface.patch_b);
    const auto ta = face_tangents(d, iface.face_a);
    const auto tb = face_tangents(d, iface.face_b);
    const std::size_t fd = ta.size();

    // Univariate relation per slave tangential direction u = perm[t].
    std::vector<Matrix> T(fd);
    std::vector<Index> master_sizes(fd), slave_sizes(fd);
    for (std::size_t t = 0; t < fd; ++t) {
        const std::size_t u = static_cast<std::size_t>(iface.orientation.perm[t]);
        KnotVector coarse = master.basis(ta[t]).knots();
        if (iface.orientation.flip[t]) coarse = coarse.reversed();
        const KnotVector& fine = slave.basis(tb[u]).knots();
        master_sizes[t] = coarse.size();
        slave_sizes[u] = fine.size();
        if (iface.nesting == Nesting::Conforming) {
            if (!(coarse == fine))
                throw GeometryMismatch("conforming interface with different knot vectors on the two sides");
            T[u] = Matrix::Identity(fine.size(), fine.size());
        } else {
            T[u] = knot_insertion_matrix(coarse, fine);
        }
    }

    const IndexList master_face = face_dofs(master, iface.face_a);
    const IndexList slave_face = face_dofs(slave, iface.face_b);
    const MultiIndexMap mmap(master_sizes), smap(slave_sizes);

    InterfaceCoupling out;
    out.slave_dofs = slave_face;
    out.weights.resize(slave_face.size());
    for (Index j = 0; j < smap.total(); ++j) {
        const auto sj = smap.multi(j);
        // nonzero master entries per master tangential direction t
        std::vector<std::vector<std::pair<Index, double>>> per(fd);
        for (std::size_t t = 0; t < fd; ++t) {
            const std::size_t u = static_cast<std::size_t>(iface.orientation.perm[t]);
            const Matrix& Tu = T[u];
            for (Index c = 0; c < Tu.cols(); ++c) {
                const double w = Tu(sj[u], c);
                if (std::abs(w) <= 1e-14) continue;
                const Index orig = iface.orientation.flip[t] ? master_sizes[t] - 1 - c : c;
                per[t].push_back({orig, w});
            }
        }
        std::vector<std::size_t> pos(fd, 0);
        auto& row = out.weights[static_cast<std::size_t>(j)];
        while (true) {
            std::vector<Index> mi(fd);
            double w = 1.0;
            for (std::size_t t = 0; t < fd; ++t) {
                mi[t] = per[t][pos[t]].first;
                w *= per[t][pos[t]].second;
            }
            row.push_back({master_face[static_cast<std::size_t>(mmap.linear(mi))], w});
            std::size_t t = 0;
            while (t < fd && ++pos[t] == per[t].size()) pos[t++] = 0;
            if (t == fd) break;
        }
        std::sort(row.begin(), row.end());
    }
    return out;
}

}  // namespace afieti

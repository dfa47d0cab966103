#include "afieti/assembly.hpp"

#include "afieti/element.hpp"
#include "afieti/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace afieti {

void ElasticityCoefficients::validate() const {
    if (!(mu > 0.0)) throw ArgumentError("Lame parameter mu must be positive");
    if (!(lambda >= 0.0)) throw ArgumentError("Lame parameter lambda must be nonnegative");
}

// ---------------------------------------------------------------------------
// element iteration

ElementIterator::ElementIterator(const Patch& patch, int points_per_element) : patch_(patch) {
    const int d = patch.dim();
    std::vector<Index> esizes, qsizes;
    for (int l = 0; l < d; ++l) {
        const SplineBasis& b = patch.basis(l);
        const int q = points_per_element > 0 ? points_per_element : b.degree() + 1;
        rules_.push_back(gauss_rule(b, q));
        const QuadratureRule& r = rules_.back();
        DirectionTable t;
        t.first.resize(static_cast<std::size_t>(r.num_elements));
        t.values.resize(static_cast<std::size_t>(r.num_elements));
        t.derivs.resize(static_cast<std::size_t>(r.num_elements));
        const int p = b.degree();
        for (Index e = 0; e < r.num_elements; ++e) {
            Matrix V(q, p + 1), D(q, p + 1);
            Index first = -1;
            for (int k = 0; k < q; ++k) {
                const auto bd = eval_basis_derivatives(b, r.points[static_cast<std::size_t>(e * q + k)], 1);
                if (first < 0) first = bd.first;
                if (bd.first != first) throw NumericalFailure("quadrature points of one element fall in different spans");
                V.row(k) = bd.table.row(0);
                D.row(k) = bd.table.row(1);
            }
            t.first[static_cast<std::size_t>(e)] = first;
            t.values[static_cast<std::size_t>(e)] = V;
            t.derivs[static_cast<std::size_t>(e)] = D;
        }
        tables_.push_back(std::move(t));
        esizes.push_back(r.num_elements);
        qsizes.push_back(r.num_elements * q);
    }
    elements_ = MultiIndexMap(esizes);
    grid_ = MultiIndexMap(qsizes);
}

void ElementIterator::run(const std::function<void(const ElementData&)>& body) const {
    const int d = patch_.dim();
    const auto& map = patch_.index_map();
    std::vector<int> np(static_cast<std::size_t>(d)), nq(static_cast<std::size_t>(d));
    Index nloc = 1, npts = 1;
    for (int l = 0; l < d; ++l) {
        np[static_cast<std::size_t>(l)] = patch_.basis(l).degree() + 1;
        nq[static_cast<std::size_t>(l)] = rules_[static_cast<std::size_t>(l)].points_per_element;
        nloc *= np[static_cast<std::size_t>(l)];
        npts *= nq[static_cast<std::size_t>(l)];
    }
    ElementData ed;
    ed.dim = d;
    ed.dofs.resize(static_cast<std::size_t>(nloc));
    ed.local_multi.assign(static_cast<std::size_t>(nloc), std::vector<Index>(static_cast<std::size_t>(d)));
    ed.phi.resize(nloc, npts);
    ed.grad.assign(static_cast<std::size_t>(d), Matrix(nloc, npts));
    ed.weight.resize(npts);
    ed.x.resize(d, npts);
    ed.det.resize(npts);
    ed.jinv.assign(static_cast<std::size_t>(npts), Matrix(d, d));
    ed.grid_index.resize(static_cast<std::size_t>(npts));

    Matrix ctrl_loc(nloc, d);
    Matrix phat(nloc, d);
    std::vector<Index> lm(static_cast<std::size_t>(d)), qm(static_cast<std::size_t>(d));
    for (Index e = 0; e < elements_.total(); ++e) {
        const auto em = elements_.multi(e);
        ed.element = em;
        for (Index k = 0; k < nloc; ++k) {
            Index rem = k, lin = 0;
            for (int l = 0; l < d; ++l) {
                const Index kl = rem % np[static_cast<std::size_t>(l)];
                rem /= np[static_cast<std::size_t>(l)];
                const Index gl = tables_[static_cast<std::size_t>(l)].first[static_cast<std::size_t>(em[static_cast<std::size_t>(l)])] + kl;
                ed.local_multi[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = gl;
                lin += gl * map.stride(l);
            }
            ed.dofs[static_cast<std::size_t>(k)] = lin;
            ctrl_loc.row(k) = patch_.control().row(lin);
        }
        for (Index q = 0; q < npts; ++q) {
            Index rem = q, glin = 0;
            double w = 1.0;
            for (int l = 0; l < d; ++l) {
                const Index ql = rem % nq[static_cast<std::size_t>(l)];
                rem /= nq[static_cast<std::size_t>(l)];
                qm[static_cast<std::size_t>(l)] = ql;
                const Index g = em[static_cast<std::size_t>(l)] * nq[static_cast<std::size_t>(l)] + ql;
                glin += g * grid_.stride(l);
                w *= rules_[static_cast<std::size_t>(l)].weights[static_cast<std::size_t>(g)];
            }
            ed.grid_index[static_cast<std::size_t>(q)] = glin;
            for (Index k = 0; k < nloc; ++k) {
                Index rem2 = k;
                double v = 1.0;
                double g3[3] = {1.0, 1.0, 1.0};
                for (int l = 0; l < d; ++l) {
                    const Index kl = rem2 % np[static_cast<std::size_t>(l)];
                    rem2 /= np[static_cast<std::size_t>(l)];
                    const auto& tab = tables_[static_cast<std::size_t>(l)];
                    const std::size_t el = static_cast<std::size_t>(em[static_cast<std::size_t>(l)]);
                    const double val = tab.values[el](qm[static_cast<std::size_t>(l)], kl);
                    const double der = tab.derivs[el](qm[static_cast<std::size_t>(l)], kl);
                    v *= val;
                    for (int m = 0; m < d; ++m) g3[m] *= (m == l) ? der : val;
                }
                ed.phi(k, q) = v;
                for (int m = 0; m < d; ++m) phat(k, m) = g3[m];
            }
            const Matrix J = ctrl_loc.transpose() * phat;  // J(i, l) = dx_i / deta_l
            const double det = J.determinant();
            if (!(std::abs(det) >= 1e-14)) throw SingularGeometry("singular Jacobian at a quadrature point");
            const Matrix Jinv = J.inverse();
            ed.jinv[static_cast<std::size_t>(q)] = Jinv;
            ed.det[q] = det;
            ed.weight[q] = w * std::abs(det);
            ed.x.col(q) = ctrl_loc.transpose() * ed.phi.col(q);
            const Matrix G = phat * Jinv;  // physical gradients, one row per local function
            for (int r = 0; r < d; ++r) ed.grad[static_cast<std::size_t>(r)].col(q) = G.col(r);
        }
        body(ed);
    }
}

// ---------------------------------------------------------------------------
// tensor-product sparsity

namespace {

/// Per-direction column ranges of each row; rows of a vector-valued matrix hold
/// one colex box per component.
class TensorSparsity {
public:
    TensorSparsity(const Patch& patch, int components) : patch_(patch), comps_(components) {
        const int d = patch.dim();
        for (int l = 0; l < d; ++l) {
            const SplineBasis& b = patch.basis(l);
            const Index m = b.size();
            std::vector<Index> lo(static_cast<std::size_t>(m), std::numeric_limits<Index>::max());
            std::vector<Index> hi(static_cast<std::size_t>(m), -1);
            const auto& bp = b.breakpoints();
            for (std::size_t e = 0; e + 1 < bp.size(); ++e) {
                const double mid = 0.5 * (bp[e] + bp[e + 1]);
                const Index first = b.find_span(mid) - b.degree();
                for (Index i = first; i <= first + b.degree(); ++i) {
                    lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], first);
                    hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], first + b.degree());
                }
            }
            lo_.push_back(lo);
            hi_.push_back(hi);
        }
        const auto& map = patch.index_map();
        const Index n = map.total();
        box_.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            const auto mi = map.multi(i);
            Index w = 1;
            for (int l = 0; l < d; ++l) w *= width(l, mi[static_cast<std::size_t>(l)]);
            box_[static_cast<std::size_t>(i)] = w;
        }
        outer_.assign(static_cast<std::size_t>(comps_ * n + 1), 0);
        for (int a = 0; a < comps_; ++a)
            for (Index i = 0; i < n; ++i)
                outer_[static_cast<std::size_t>(a * n + i + 1)] = box_[static_cast<std::size_t>(i)] * comps_;
        for (std::size_t r = 1; r < outer_.size(); ++r) outer_[r] += outer_[r - 1];
        inner_.resize(static_cast<std::size_t>(outer_.back()));
        values_.assign(static_cast<std::size_t>(outer_.back()), 0.0);
        for (int a = 0; a < comps_; ++a) {
            for (Index i = 0; i < n; ++i) {
                const auto mi = map.multi(i);
                Index pos = outer_[static_cast<std::size_t>(a * n + i)];
                for (int b = 0; b < comps_; ++b) {
                    // colex walk over the box
                    std::vector<Index> j(static_cast<std::size_t>(d));
                    for (int l = 0; l < d; ++l) j[static_cast<std::size_t>(l)] = lo_[static_cast<std::size_t>(l)][static_cast<std::size_t>(mi[static_cast<std::size_t>(l)])];
                    for (Index t = 0; t < box_[static_cast<std::size_t>(i)]; ++t) {
                        inner_[static_cast<std::size_t>(pos++)] = b * n + map.linear(j);
                        for (int l = 0; l < d; ++l) {
                            auto& jl = j[static_cast<std::size_t>(l)];
                            const Index li = mi[static_cast<std::size_t>(l)];
                            if (++jl <= hi_[static_cast<std::size_t>(l)][static_cast<std::size_t>(li)]) break;
                            jl = lo_[static_cast<std::size_t>(l)][static_cast<std::size_t>(li)];
                        }
                    }
                }
            }
        }
    }

    Index width(int l, Index i) const {
        return hi_[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] - lo_[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] + 1;
    }

    /// Scatters a local (comps*nloc)^2 matrix, component-major within the element.
    void add(const ElementData& ed, const Matrix& local) {
        const int d = patch_.dim();
        const Index n = patch_.num_basis();
        const Index nloc = static_cast<Index>(ed.dofs.size());
        std::vector<Index> offs(static_cast<std::size_t>(nloc));
        for (Index k = 0; k < nloc; ++k) {
            const auto& ik = ed.local_multi[static_cast<std::size_t>(k)];
            // offsets of all local columns inside row k's box
            for (Index c = 0; c < nloc; ++c) {
                const auto& jc = ed.local_multi[static_cast<std::size_t>(c)];
                Index off = 0, stride = 1;
                for (int l = 0; l < d; ++l) {
                    const Index il = ik[static_cast<std::size_t>(l)];
                    off += (jc[static_cast<std::size_t>(l)] - lo_[static_cast<std::size_t>(l)][static_cast<std::size_t>(il)]) * stride;
                    stride *= width(l, il);
                }
                offs[static_cast<std::size_t>(c)] = off;
            }
            const Index i = ed.dofs[static_cast<std::size_t>(k)];
            const Index box = box_[static_cast<std::size_t>(i)];
            for (int a = 0; a < comps_; ++a) {
                const Index row_start = outer_[static_cast<std::size_t>(a * n + i)];
                for (int b = 0; b < comps_; ++b) {
                    double* dst = values_.data() + row_start + b * box;
                    for (Index c = 0; c < nloc; ++c) dst[offs[static_cast<std::size_t>(c)]] += local(a * nloc + k, b * nloc + c);
                }
            }
        }
    }

    SparseMatrix finish() const {
        const Index rows = comps_ * patch_.num_basis();
        std::vector<int> outer(outer_.size()), inner(inner_.size());
        for (std::size_t r = 0; r < outer_.size(); ++r) outer[r] = static_cast<int>(outer_[r]);
        for (std::size_t r = 0; r < inner_.size(); ++r) inner[r] = static_cast<int>(inner_[r]);
        Eigen::Map<const SparseMatrix> view(rows, rows, static_cast<Index>(values_.size()), outer.data(), inner.data(),
                                           values_.data());
        return SparseMatrix(view);
    }

private:
    const Patch& patch_;
    int comps_;
    std::vector<std::vector<Index>> lo_, hi_;
    std::vector<Index> box_;
    std::vector<Index> outer_, inner_;
    std::vector<double> values_;
};

}  // namespace

SparseMatrix assemble_stiffness(const Patch& patch, const ElasticityCoefficients& coeffs) {
    coeffs.validate();
    const int d = patch.dim();
    TensorSparsity sp(patch, d);
    ElementIterator it(patch);
    const double mu = coeffs.mu, lam = coeffs.lambda;
    std::vector<Matrix> Y(static_cast<std::size_t>(d));
    std::vector<std::vector<Matrix>> P(static_cast<std::size_t>(d), std::vector<Matrix>(static_cast<std::size_t>(d)));
    Matrix local;
    it.run([&](const ElementData& ed) {
        const Index nloc = static_cast<Index>(ed.dofs.size());
        const Vector sw = ed.weight.cwiseSqrt();
        for (int r = 0; r < d; ++r) Y[static_cast<std::size_t>(r)] = ed.grad[static_cast<std::size_t>(r)] * sw.asDiagonal();
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                P[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].noalias() =
                    Y[static_cast<std::size_t>(a)] * Y[static_cast<std::size_t>(b)].transpose();
                if (b != a) P[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = P[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].transpose();
            }
        Matrix lap = Matrix::Zero(nloc, nloc);
        for (int r = 0; r < d; ++r) lap += P[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
        local.resize(d * nloc, d * nloc);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                // mu grad.grad delta_ab + mu d_b phi_i d_a phi_j + lambda d_a phi_i d_b phi_j
                auto blk = local.block(a * nloc, b * nloc, nloc, nloc);
                blk = mu * P[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] +
                      lam * P[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                if (a == b) blk += mu * lap;
            }
        sp.add(ed, local);
    });
    return sp.finish();
}

SparseMatrix assemble_scalar_mass(const Patch& patch) {
    TensorSparsity sp(patch, 1);
    ElementIterator it(patch);
    it.run([&](const ElementData& ed) {
        const Matrix Y = ed.phi * ed.weight.cwiseSqrt().asDiagonal();
        sp.add(ed, Y * Y.transpose());
    });
    return sp.finish();
}

SparseMatrix assemble_mass(const Patch& patch) {
    const SparseMatrix Ms = assemble_scalar_mass(patch);
    const int d = patch.dim();
    const Index n = Ms.rows();
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(Ms.nonZeros() * d));
    for (int c = 0; c < d; ++c)
        for (Index r = 0; r < n; ++r)
            for (SparseMatrix::InnerIterator it(Ms, r); it; ++it) trip.emplace_back(c * n + r, c * n + it.col(), it.value());
    SparseMatrix M(d * n, d * n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Vector assemble_load(const Patch& patch, const LoadData& load, const std::vector<int>& neumann_faces) {
    const int d = patch.dim();
    const Index n = patch.num_basis();
    Vector f = Vector::Zero(d * n);
    if (load.body) {
        ElementIterator it(patch);
        it.run([&](const ElementData& ed) {
            for (Index q = 0; q < ed.weight.size(); ++q) {
                const Vector fx = load.body(ed.x.col(q));
                for (std::size_t k = 0; k < ed.dofs.size(); ++k) {
                    const double s = ed.weight[q] * ed.phi(static_cast<Index>(k), q);
                    for (int c = 0; c < d; ++c) f[c * n + ed.dofs[k]] += s * fx[c];
                }
            }
        });
    }
    if (!neumann_faces.empty() && !load.traction) throw ArgumentError("Neumann faces given without traction data");
    for (int face : neumann_faces) {
        const auto tang = face_tangents(d, face);
        std::vector<QuadratureRule> rules;
        std::vector<Index> sizes;
        for (int t : tang) {
            rules.push_back(gauss_rule(patch.basis(t)));
            sizes.push_back(rules.back().size());
        }
        const MultiIndexMap fmap(sizes);
        const int dir = face_direction(face);
        const double sign = face_side(face) == 0 ? -1.0 : 1.0;
        for (Index q = 0; q < fmap.total(); ++q) {
            const auto qi = fmap.multi(q);
            Vector s(d - 1);
            double w = 1.0;
            for (std::size_t t = 0; t < tang.size(); ++t) {
                s[static_cast<Index>(t)] = rules[t].points[static_cast<std::size_t>(qi[t])];
                w *= rules[t].weights[static_cast<std::size_t>(qi[t])];
            }
            const Vector eta = face_point(d, face, s);
            const PointBasis pb = eval_point(patch, eta);
            Matrix J = Matrix::Zero(d, d);
            Vector x = Vector::Zero(d);
            for (std::size_t a = 0; a < pb.indices.size(); ++a) {
                J += patch.control().row(pb.indices[a]).transpose() * pb.table.block(1, static_cast<Index>(a), d, 1).transpose();
                x += pb.table(0, static_cast<Index>(a)) * patch.control().row(pb.indices[a]).transpose();
            }
            const double det = J.determinant();
            if (!(std::abs(det) >= 1e-14)) throw SingularGeometry("singular Jacobian on a Neumann face");
            // gradient of eta_dir in physical space, scaled to the outward unit normal
            const Vector g = J.inverse().transpose().col(dir);
            const Vector nrm = sign * g / g.norm();
            const double dS = std::abs(det) * g.norm() * w;
            const Vector tr = load.traction(x, nrm);
            for (std::size_t a = 0; a < pb.indices.size(); ++a) {
                const double v = pb.table(0, static_cast<Index>(a)) * dS;
                if (v == 0.0) continue;
                for (int c = 0; c < d; ++c) f[c * n + pb.indices[a]] += v * tr[c];
            }
        }
    }
    return f;
}

SparseMatrix component_block(const SparseMatrix& A, int dim, int a, int b) {
    const Index n = A.rows() / dim;
    return SparseMatrix(A.block(a * n, b * n, n, n));
}

// ---------------------------------------------------------------------------
// parametric blocks

std::vector<double> ParametricBlocks::weights(int l, const ElasticityCoefficients& coeffs) const {
    std::vector<double> w(static_cast<std::size_t>(dim()), coeffs.mu);
    w[static_cast<std::size_t>(l)] = 2.0 * coeffs.mu + coeffs.lambda;
    return w;
}

namespace {

KroneckerSum stiffness_sum(const std::vector<Matrix>& K, const std::vector<Matrix>& M, const std::vector<double>& w) {
    KroneckerSum sum;
    const std::size_t d = K.size();
    for (std::size_t m = 0; m < d; ++m) {
        std::vector<Matrix> f;
        for (std::size_t n = 0; n < d; ++n) f.push_back(n == m ? K[n] : M[n]);
        sum.add(w[m], KroneckerOperator(std::move(f)));
    }
    return sum;
}

Matrix interior(const Matrix& A) { return A.block(1, 1, A.rows() - 2, A.cols() - 2); }

}  // namespace

KroneckerSum ParametricBlocks::stiffness(int l, const ElasticityCoefficients& coeffs) const {
    return stiffness_sum(K, M, weights(l, coeffs));
}

KroneckerOperator ParametricBlocks::mass() const { return KroneckerOperator(M); }

KroneckerSum ParametricBlocks::interior_stiffness(int l, const ElasticityCoefficients& coeffs) const {
    std::vector<Matrix> Ki, Mi;
    for (int m = 0; m < dim(); ++m) {
        Ki.push_back(interior(K[static_cast<std::size_t>(m)]));
        Mi.push_back(interior(M[static_cast<std::size_t>(m)]));
    }
    return stiffness_sum(Ki, Mi, weights(l, coeffs));
}

ParametricBlocks parametric_blocks(const Patch& patch) {
    ParametricBlocks pb;
    for (int l = 0; l < patch.dim(); ++l) {
        Matrix K, M;
        univariate_matrices(patch.basis(l), K, M);
        pb.K.push_back(std::move(K));
        pb.M.push_back(std::move(M));
    }
    return pb;
}

void weighted_univariate(const SplineBasis& basis, const QuadratureRule& rule, const Vector& nu, const Vector& beta,
                         Matrix& K, Matrix& M) {
    if (nu.size() != rule.size() || beta.size() != rule.size())
        throw ArgumentError("weights must be given at every quadrature point");
    const Index m = basis.size();
    K = Matrix::Zero(m, m);
    M = Matrix::Zero(m, m);
    for (Index q = 0; q < rule.size(); ++q) {
        const auto bd = eval_basis_derivatives(basis, rule.points[static_cast<std::size_t>(q)], 1);
        const double w = rule.weights[static_cast<std::size_t>(q)];
        const Index np = bd.table.cols();
        K.block(bd.first, bd.first, np, np) += (w * nu[q]) * bd.table.row(1).transpose() * bd.table.row(1);
        M.block(bd.first, bd.first, np, np) += (w * beta[q]) * bd.table.row(0).transpose() * bd.table.row(0);
    }
}

// ---------------------------------------------------------------------------
// coefficient tensors and their separable approximation

Matrix CoefficientField::diagonals() const {
    const Index d = values.empty() ? 0 : values.front().rows();
    Matrix out(static_cast<Index>(values.size()), d);
    for (std::size_t g = 0; g < values.size(); ++g) out.row(static_cast<Index>(g)) = values[g].diagonal().transpose();
    return out;
}

CoefficientField coefficient_tensor(const Patch& patch, const ElasticityCoefficients& coeffs, int l) {
    coeffs.validate();
    const int d = patch.dim();
    if (l < 0 || l >= d) throw ArgumentError("component index out of range");
    ElementIterator it(patch);
    CoefficientField cf;
    cf.rules = it.rules();
    cf.grid = it.grid();
    cf.values.assign(static_cast<std::size_t>(cf.grid.total()), Matrix());
    it.run([&](const ElementData& ed) {
        for (Index q = 0; q < ed.det.size(); ++q) {
            const Matrix& Ji = ed.jinv[static_cast<std::size_t>(q)];
            const Matrix JJ = Ji * Ji.transpose();
            const Vector jl = Ji.col(l);
            cf.values[static_cast<std::size_t>(ed.grid_index[static_cast<std::size_t>(q)])] =
                (coeffs.mu * JJ + (coeffs.mu + coeffs.lambda) * jl * jl.transpose()) * std::abs(ed.det[q]);
        }
    });
    return cf;
}

double SeparableCoefficient::value(int m, const std::vector<Index>& q) const {
    double v = nu[static_cast<std::size_t>(m)][q[static_cast<std::size_t>(m)]];
    for (std::size_t n = 0; n < beta.size(); ++n)
        if (static_cast<int>(n) != m) v *= beta[n][q[n]];
    return v;
}

SeparableCoefficient separable_fit(const Matrix& diagonals, const std::vector<Index>& grid_sizes, int sweeps) {
    const int d = static_cast<int>(grid_sizes.size());
    const MultiIndexMap grid(grid_sizes);
    if (diagonals.rows() != grid.total() || diagonals.cols() != d)
        throw ArgumentError("coefficient samples do not match the quadrature grid");
    const Index npts = grid.total();
    Matrix L(npts, d);
    for (Index g = 0; g < npts; ++g)
        for (int m = 0; m < d; ++m) {
            const double v = diagonals(g, m);
            if (!(v > 0.0)) throw ApproximationDomainError("coefficient samples must be positive");
            L(g, m) = std::log(v);
        }
    std::vector<std::vector<Index>> multi(static_cast<std::size_t>(npts));
    for (Index g = 0; g < npts; ++g) multi[static_cast<std::size_t>(g)] = grid.multi(g);

    std::vector<Vector> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
    for (int m = 0; m < d; ++m) {
        a[static_cast<std::size_t>(m)] = Vector::Zero(grid_sizes[static_cast<std::size_t>(m)]);
        b[static_cast<std::size_t>(m)] = Vector::Zero(grid_sizes[static_cast<std::size_t>(m)]);
    }
    auto others = [&](const std::vector<Index>& q, int skip1, int skip2) {
        double s = 0.0;
        for (int n = 0; n < d; ++n)
            if (n != skip1 && n != skip2) s += b[static_cast<std::size_t>(n)][q[static_cast<std::size_t>(n)]];
        return s;
    };
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int m = 0; m < d; ++m) {
            Vector sum = Vector::Zero(grid_sizes[static_cast<std::size_t>(m)]);
            for (Index g = 0; g < npts; ++g) {
                const auto& q = multi[static_cast<std::size_t>(g)];
                sum[q[static_cast<std::size_t>(m)]] += L(g, m) - others(q, m, -1);
            }
            a[static_cast<std::size_t>(m)] = sum / static_cast<double>(npts / grid_sizes[static_cast<std::size_t>(m)]);
        }
        for (int n = 0; n < d; ++n) {
            Vector sum = Vector::Zero(grid_sizes[static_cast<std::size_t>(n)]);
            for (Index g = 0; g < npts; ++g) {
                const auto& q = multi[static_cast<std::size_t>(g)];
                for (int m = 0; m < d; ++m) {
                    if (m == n) continue;
                    sum[q[static_cast<std::size_t>(n)]] += L(g, m) - a[static_cast<std::size_t>(m)][q[static_cast<std::size_t>(m)]] - others(q, m, n);
                }
            }
            b[static_cast<std::size_t>(n)] = sum / static_cast<double>((d - 1) * (npts / grid_sizes[static_cast<std::size_t>(n)]));
        }
    }
    // unit geometric mean for every beta factor
    for (int n = 0; n < d; ++n) {
        const double mean = b[static_cast<std::size_t>(n)].mean();
        b[static_cast<std::size_t>(n)].array() -= mean;
        for (int m = 0; m < d; ++m)
            if (m != n) a[static_cast<std::size_t>(m)].array() += mean;
    }
    SeparableCoefficient out;
    double sq = 0.0;
    for (Index g = 0; g < npts; ++g) {
        const auto& q = multi[static_cast<std::size_t>(g)];
        for (int m = 0; m < d; ++m) {
            const double r = L(g, m) - a[static_cast<std::size_t>(m)][q[static_cast<std::size_t>(m)]] - others(q, m, -1);
            sq += r * r;
        }
    }
    out.residual = std::sqrt(sq / static_cast<double>(npts * d));
    for (int m = 0; m < d; ++m) {
        out.nu.push_back(a[static_cast<std::size_t>(m)].array().exp().matrix());
        out.beta.push_back(b[static_cast<std::size_t>(m)].array().exp().matrix());
    }
    return out;
}

KroneckerSum WeightedBlocks::stiffness() const {
    return stiffness_sum(K, M, std::vector<double>(K.size(), 1.0));
}

KroneckerOperator WeightedBlocks::mass() const { return KroneckerOperator(M); }

WeightedBlocks weighted_blocks(const Patch& patch, const ElasticityCoefficients& coeffs, int l) {
    const CoefficientField cf = coefficient_tensor(patch, coeffs, l);
    WeightedBlocks wb;
    wb.fit = separable_fit(cf.diagonals(), cf.grid.sizes());
    for (int m = 0; m < patch.dim(); ++m) {
        Matrix K, M;
        weighted_univariate(patch.basis(m), cf.rules[static_cast<std::size_t>(m)], wb.fit.nu[static_cast<std::size_t>(m)],
                            wb.fit.beta[static_cast<std::size_t>(m)], K, M);
        wb.K.push_back(std::move(K));
        wb.M.push_back(std::move(M));
    }
    return wb;
}

}  // namespace afieti

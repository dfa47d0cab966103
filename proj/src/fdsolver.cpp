#include "afieti/fdsolver.hpp"

#include "afieti/dense_la.hpp"
#include "afieti/error.hpp"

#include <cmath>

namespace afieti {

FdFactorization::FdFactorization(std::vector<Matrix> K, std::vector<Matrix> M, std::vector<double> c, double sigma,
                                 double s)
    : K_(std::move(K)), M_(std::move(M)), c_(std::move(c)), sigma_(sigma), s_(s) {
    const std::size_t d = K_.size();
    if (d == 0 || M_.size() != d || c_.size() != d) throw ArgumentError("FD setup needs one (K, M, c) per direction");
    for (std::size_t m = 0; m < d; ++m) {
        PencilEigen pe = pencil_eig(K_[m], M_[m]);
        U_.push_back(std::move(pe.U));
        D_.push_back(std::move(pe.D));
    }
    // Lambda(i) = s (sum_m c_m D_m(i_m) + sigma), colex over directions
    lambda_ = Vector::Constant(1, s_ * sigma_);
    for (std::size_t m = 0; m < d; ++m) {
        const Vector& Dm = D_[m];
        Vector next(lambda_.size() * Dm.size());
        for (Index j = 0; j < Dm.size(); ++j)
            next.segment(j * lambda_.size(), lambda_.size()) = lambda_.array() + s_ * c_[m] * Dm[j];
        lambda_.swap(next);
    }
    if (lambda_.size() > 0 && !(lambda_.minCoeff() > 0.0))
        throw NumericalFailure("fast diagonalization core has a non-positive entry");
}

void FdFactorization::set_outer_scaling(const Vector& D) {
    if (D.size() != size()) throw ArgumentError("scaling diagonal has the wrong length");
    if (D.size() > 0 && !(D.minCoeff() > 0.0)) throw ScalingError("scaling diagonal must be positive");
    sqrt_scaling_ = D.cwiseSqrt();
}

Vector FdFactorization::apply(const Vector& r, FlopCounter* counter) const {
    if (r.size() != size()) throw ArgumentError("FD apply: vector length mismatch");
    Vector t = sqrt_scaling_.size() ? Vector(r.cwiseQuotient(sqrt_scaling_)) : r;
    t = kron_apply(U_, t, true, counter);
    t.array() /= lambda_.array();
    t = kron_apply(U_, t, false, counter);
    if (sqrt_scaling_.size()) t.array() /= sqrt_scaling_.array();
    return t;
}

Vector FdFactorization::apply_target(const Vector& x) const {
    if (x.size() != size()) throw ArgumentError("FD target apply: vector length mismatch");
    const Vector xs = sqrt_scaling_.size() ? Vector(x.cwiseProduct(sqrt_scaling_)) : x;
    Vector y = Vector::Zero(x.size());
    const std::size_t d = K_.size();
    for (std::size_t m = 0; m < d; ++m) {
        std::vector<Matrix> f;
        for (std::size_t n = 0; n < d; ++n) f.push_back(n == m ? K_[n] : M_[n]);
        y += c_[m] * kron_apply(f, xs);
    }
    if (sigma_ != 0.0) y += sigma_ * kron_apply(M_, xs);
    y *= s_;
    if (sqrt_scaling_.size()) y.array() *= sqrt_scaling_.array();
    return y;
}

Matrix FdFactorization::materialize_target() const {
    Matrix T(size(), size());
    Vector e = Vector::Zero(size());
    for (Index j = 0; j < size(); ++j) {
        e[j] = 1.0;
        T.col(j) = apply_target(e);
        e[j] = 0.0;
    }
    return T;
}

std::vector<Matrix> interior_blocks(const std::vector<Matrix>& blocks) {
    std::vector<Matrix> out;
    for (const auto& B : blocks) {
        if (B.rows() < 3) throw ArgumentError("interior restriction needs at least three functions per direction");
        out.push_back(B.block(1, 1, B.rows() - 2, B.cols() - 2));
    }
    return out;
}

FdFactorization fd_setup_full(const ParametricBlocks& blocks, int l, const ElasticityCoefficients& coeffs, double H) {
    coeffs.validate();
    const int d = blocks.dim();
    return FdFactorization(blocks.K, blocks.M, blocks.weights(l, coeffs), 1.0, std::pow(H, d - 2));
}

FdFactorization fd_setup_interior(const ParametricBlocks& blocks, int l, const ElasticityCoefficients& coeffs) {
    coeffs.validate();
    return FdFactorization(interior_blocks(blocks.K), interior_blocks(blocks.M), blocks.weights(l, coeffs), 0.0, 1.0);
}

FdFactorization fd_setup_geo(const WeightedBlocks& blocks, double H, const Vector& physical_diagonal) {
    const std::size_t d = blocks.K.size();
    FdFactorization fd(blocks.K, blocks.M, std::vector<double>(d, 1.0), 1.0 / (H * H), 1.0);
    const Vector approx = blocks.stiffness().diagonal() + blocks.mass().diagonal() / (H * H);
    if (approx.size() != physical_diagonal.size()) throw ArgumentError("physical diagonal has the wrong length");
    if (!(approx.minCoeff() > 0.0)) throw ScalingError("weighted diagonal must be positive");
    fd.set_outer_scaling(physical_diagonal.cwiseQuotient(approx));
    return fd;
}

FdFactorization fd_setup_geo_interior(const WeightedBlocks& blocks) {
    return FdFactorization(interior_blocks(blocks.K), interior_blocks(blocks.M),
                           std::vector<double>(blocks.K.size(), 1.0), 0.0, 1.0);
}

}  // namespace afieti

#include "afieti/kron.hpp"

#include "afieti/error.hpp"

#include <string>

namespace afieti {

MultiIndexMap::MultiIndexMap(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
    strides_.resize(sizes_.size());
    total_ = 1;
    for (std::size_t m = 0; m < sizes_.size(); ++m) {
        if (sizes_[m] < 0) throw ArgumentError("negative index-box size");
        strides_[m] = total_;
        total_ *= sizes_[m];
    }
}

Index MultiIndexMap::linear(const std::vector<Index>& multi) const {
    if (multi.size() != sizes_.size()) throw ArgumentError("multi-index has wrong dimension");
    Index lin = 0;
    for (std::size_t m = 0; m < sizes_.size(); ++m) {
        if (multi[m] < 0 || multi[m] >= sizes_[m]) throw ArgumentError("multi-index component out of range");
        lin += multi[m] * strides_[m];
    }
    return lin;
}

std::vector<Index> MultiIndexMap::multi(Index linear) const {
    if (linear < 0 || linear >= total_) throw ArgumentError("linear index out of range");
    std::vector<Index> out(sizes_.size());
    for (std::size_t m = 0; m < sizes_.size(); ++m) {
        out[m] = linear % sizes_[m];
        linear /= sizes_[m];
    }
    return out;
}

Vector kron_apply(const std::vector<Matrix>& factors, const Vector& v, bool transpose, FlopCounter* counter) {
    Index expected = 1;
    for (const auto& F : factors) expected *= transpose ? F.rows() : F.cols();
    if (v.size() != expected) throw ArgumentError("Kronecker apply: vector length mismatch");

    Vector cur = v;
    Vector next;
    const std::size_t d = factors.size();
    for (std::size_t m = 0; m < d; ++m) {
        const Matrix& F = factors[m];
        const Index out_m = transpose ? F.cols() : F.rows();
        const Index in_m = transpose ? F.rows() : F.cols();
        Index left = 1, right = 1;
        for (std::size_t k = 0; k < m; ++k) left *= transpose ? factors[k].cols() : factors[k].rows();
        for (std::size_t k = m + 1; k < d; ++k) right *= transpose ? factors[k].rows() : factors[k].cols();
        next.resize(left * out_m * right);
        for (Index r = 0; r < right; ++r) {
            Eigen::Map<const Matrix> X(cur.data() + r * left * in_m, left, in_m);
            Eigen::Map<Matrix> Y(next.data() + r * left * out_m, left, out_m);
            if (transpose) {
                Y.noalias() = X * F;
            } else {
                Y.noalias() = X * F.transpose();
            }
        }
        if (counter) counter->flops += 2 * left * in_m * out_m * right;
        cur.swap(next);
    }
    return cur;
}

KroneckerOperator::KroneckerOperator(std::vector<Matrix> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw ArgumentError("Kronecker operator needs at least one factor");
}

Index KroneckerOperator::rows() const {
    Index r = 1;
    for (const auto& F : factors_) r *= F.rows();
    return r;
}

Index KroneckerOperator::cols() const {
    Index c = 1;
    for (const auto& F : factors_) c *= F.cols();
    return c;
}

Vector KroneckerOperator::apply(const Vector& v, FlopCounter* counter) const {
    return kron_apply(factors_, v, false, counter);
}

Vector KroneckerOperator::apply_transpose(const Vector& v, FlopCounter* counter) const {
    return kron_apply(factors_, v, true, counter);
}

KroneckerOperator KroneckerOperator::transposed() const {
    std::vector<Matrix> t;
    for (const auto& F : factors_) t.push_back(F.transpose());
    return KroneckerOperator(std::move(t));
}

Vector KroneckerOperator::diagonal() const {
    std::vector<Matrix> diags;
    for (const auto& F : factors_) {
        if (F.rows() != F.cols()) throw ArgumentError("diagonal of a non-square Kronecker operator");
        diags.push_back(F.diagonal());
    }
    // outer product of the diagonals in colex order
    Vector out = Vector::Ones(1);
    for (const auto& dv : diags) {
        Vector next(out.size() * dv.size());
        for (Index j = 0; j < dv.size(); ++j) next.segment(j * out.size(), out.size()) = dv(j, 0) * out;
        out.swap(next);
    }
    return out;
}

Matrix KroneckerOperator::materialize() const {
    Matrix K = factors_.front();
    for (std::size_t m = 1; m < factors_.size(); ++m) {
        const Matrix& F = factors_[m];
        Matrix next(F.rows() * K.rows(), F.cols() * K.cols());
        for (Index i = 0; i < F.rows(); ++i)
            for (Index j = 0; j < F.cols(); ++j) next.block(i * K.rows(), j * K.cols(), K.rows(), K.cols()) = F(i, j) * K;
        K.swap(next);
    }
    return K;
}

KroneckerSum::KroneckerSum(std::vector<KroneckerTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (t.op.rows() != terms_.front().op.rows() || t.op.cols() != terms_.front().op.cols())
            throw ArgumentError("Kronecker sum terms differ in shape");
    }
}

void KroneckerSum::add(double coefficient, KroneckerOperator op) {
    if (!terms_.empty() && (op.rows() != rows() || op.cols() != cols()))
        throw ArgumentError("Kronecker sum terms differ in shape");
    terms_.push_back({coefficient, std::move(op)});
}

Index KroneckerSum::rows() const { return terms_.empty() ? 0 : terms_.front().op.rows(); }
Index KroneckerSum::cols() const { return terms_.empty() ? 0 : terms_.front().op.cols(); }

Vector KroneckerSum::apply(const Vector& v, FlopCounter* counter) const {
    if (terms_.empty()) throw ArgumentError("empty Kronecker sum");
    Vector out = Vector::Zero(rows());
    for (const auto& t : terms_) {
        if (t.coefficient == 0.0) {
            if (v.size() != cols()) throw ArgumentError("Kronecker apply: vector length mismatch");
            continue;
        }
        out += t.coefficient * t.op.apply(v, counter);
    }
    return out;
}

Vector KroneckerSum::diagonal() const {
    Vector out = Vector::Zero(rows());
    for (const auto& t : terms_) out += t.coefficient * t.op.diagonal();
    return out;
}

Matrix KroneckerSum::materialize() const {
    Matrix out = Matrix::Zero(rows(), cols());
    for (const auto& t : terms_) out += t.coefficient * t.op.materialize();
    return out;
}

}  // namespace afieti

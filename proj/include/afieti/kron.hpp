#pragma once

#include "afieti/types.hpp"

#include <cstdint>
#include <vector>

namespace afieti {

/// Colexicographic linearization of a d-dimensional index box; direction 0 varies fastest.
class MultiIndexMap {
public:
    MultiIndexMap() = default;
    explicit MultiIndexMap(std::vector<Index> sizes);

    int dim() const { return static_cast<int>(sizes_.size()); }
    const std::vector<Index>& sizes() const { return sizes_; }
    Index size(int direction) const { return sizes_[static_cast<std::size_t>(direction)]; }
    Index total() const { return total_; }
    /// Distance between consecutive indices along a direction.
    Index stride(int direction) const { return strides_[static_cast<std::size_t>(direction)]; }

    Index linear(const std::vector<Index>& multi) const;
    std::vector<Index> multi(Index linear) const;

private:
    std::vector<Index> sizes_;
    std::vector<Index> strides_;
    Index total_ = 0;
};

/// Operation counter for mode products (multiply-adds counted as 2 flops).
struct FlopCounter {
    std::int64_t flops = 0;
};

/// F_d (x) ... (x) F_1, stored by direction: factor(0) is F_1 (acts on the fastest index).
class KroneckerOperator {
public:
    KroneckerOperator() = default;
    explicit KroneckerOperator(std::vector<Matrix> factors_by_direction);

    int dim() const { return static_cast<int>(factors_.size()); }
    const Matrix& factor(int direction) const { return factors_[static_cast<std::size_t>(direction)]; }
    Index rows() const;
    Index cols() const;

    Vector apply(const Vector& v, FlopCounter* counter = nullptr) const;
    Vector apply_transpose(const Vector& v, FlopCounter* counter = nullptr) const;
    KroneckerOperator transposed() const;
    /// Diagonal of a square operator: product of factor diagonals.
    Vector diagonal() const;
    /// Dense materialization; small sizes only.
    Matrix materialize() const;

private:
    std::vector<Matrix> factors_;
};

/// Mode-product apply of per-direction factors.
Vector kron_apply(const std::vector<Matrix>& factors_by_direction, const Vector& v, bool transpose = false,
                  FlopCounter* counter = nullptr);

struct KroneckerTerm {
    double coefficient = 1.0;
    KroneckerOperator op;
};

/// Sum of scaled Kronecker products sharing a shape.
class KroneckerSum {
public:
    KroneckerSum() = default;
    explicit KroneckerSum(std::vector<KroneckerTerm> terms);

    void add(double coefficient, KroneckerOperator op);
    const std::vector<KroneckerTerm>& terms() const { return terms_; }
    Index rows() const;
    Index cols() const;

    Vector apply(const Vector& v, FlopCounter* counter = nullptr) const;
    Vector diagonal() const;
    Matrix materialize() const;

private:
    std::vector<KroneckerTerm> terms_;
};

inline Vector kron_sum_apply(const KroneckerSum& sum, const Vector& v) { return sum.apply(v); }

}  // namespace afieti

#pragma once

#include "afieti/assembly.hpp"
#include "afieti/kron.hpp"
#include "afieti/types.hpp"

#include <vector>

namespace afieti {

/// Fast diagonalization of
///   T = s * ( sum_m c_m (K_m in slot m, M_n elsewhere) + sigma * (M_d x ... x M_1) ),
/// optionally wrapped as D^{1/2} T D^{1/2}. apply() returns the solution of the wrapped system.
class FdFactorization {
public:
    FdFactorization() = default;
    FdFactorization(std::vector<Matrix> K, std::vector<Matrix> M, std::vector<double> c, double sigma, double s);

    /// D^{1/2} T D^{1/2}; entries of D must be positive (ScalingError otherwise).
    void set_outer_scaling(const Vector& D);

    Vector apply(const Vector& r, FlopCounter* counter = nullptr) const;
    /// Forward multiplication with the (wrapped) target.
    Vector apply_target(const Vector& x) const;
    Matrix materialize_target() const;

    int dim() const { return static_cast<int>(U_.size()); }
    Index size() const { return lambda_.size(); }
    const std::vector<Matrix>& eigenvectors() const { return U_; }
    const Vector& lambda() const { return lambda_; }
    const std::vector<Vector>& pencil_values() const { return D_; }

private:
    std::vector<Matrix> K_, M_;
    std::vector<double> c_;
    double sigma_ = 0.0, s_ = 1.0;
    std::vector<Matrix> U_;
    std::vector<Vector> D_;
    Vector lambda_;
    Vector sqrt_scaling_;  ///< empty when unscaled
};

/// H^{d-2} (A_l + M) from the parametric blocks.
FdFactorization fd_setup_full(const ParametricBlocks& blocks, int l, const ElasticityCoefficients& coeffs, double H);
/// (A_l)_II on the interior index box.
FdFactorization fd_setup_interior(const ParametricBlocks& blocks, int l, const ElasticityCoefficients& coeffs);
/// D_A^{1/2} (A~_l + H^{-2} M~_l) D_A^{1/2} from weighted blocks and the physical diagonal target.
FdFactorization fd_setup_geo(const WeightedBlocks& blocks, double H, const Vector& physical_diagonal);
/// Interior part of the weighted stiffness A~_l, unscaled.
FdFactorization fd_setup_geo_interior(const WeightedBlocks& blocks);

/// Interior restriction of univariate blocks (first and last index dropped).
std::vector<Matrix> interior_blocks(const std::vector<Matrix>& blocks);

}  // namespace afieti

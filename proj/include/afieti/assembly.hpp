#pragma once

#include "afieti/bspline.hpp"
#include "afieti/geometry.hpp"
#include "afieti/kron.hpp"
#include "afieti/types.hpp"

#include <functional>
#include <vector>

namespace afieti {

struct ElasticityCoefficients {
    double lambda = 0.3 / 0.52;
    double mu = 1.0 / 2.6;

    /// ArgumentError unless mu > 0 and lambda >= 0.
    void validate() const;
};

/// Body force f(x) and traction g(x, n) (n the outward unit normal).
struct LoadData {
    std::function<Vector(const Vector&)> body;
    std::function<Vector(const Vector&, const Vector&)> traction;
};

/// Vector-valued patch matrices use component-major layout: entry c*n + i is component c of function i.
SparseMatrix assemble_stiffness(const Patch& patch, const ElasticityCoefficients& coeffs);
/// Scalar mass matrix M_s; the vector-valued mass is I_d (x) M_s.
SparseMatrix assemble_scalar_mass(const Patch& patch);
SparseMatrix assemble_mass(const Patch& patch);
/// Body-force integral plus traction integrals over the listed Neumann faces.
Vector assemble_load(const Patch& patch, const LoadData& load, const std::vector<int>& neumann_faces);

/// Extracts the (component a, component b) block of a vector-valued patch matrix.
SparseMatrix component_block(const SparseMatrix& A, int dim, int a, int b);

/// Univariate parametric stiffness and mass matrices per direction.
struct ParametricBlocks {
    std::vector<Matrix> K;
    std::vector<Matrix> M;

    int dim() const { return static_cast<int>(K.size()); }
    /// Direction weights of component l: (2 mu + lambda) on direction l, mu elsewhere.
    std::vector<double> weights(int l, const ElasticityCoefficients& coeffs) const;
    /// sum_m w_m (K_m in slot m, M elsewhere)
    KroneckerSum stiffness(int l, const ElasticityCoefficients& coeffs) const;
    KroneckerOperator mass() const;
    /// Same operators on the interior index box (first/last index dropped per direction).
    KroneckerSum interior_stiffness(int l, const ElasticityCoefficients& coeffs) const;
};

ParametricBlocks parametric_blocks(const Patch& patch);

/// Univariate K(i,j) = int w b_i' b_j' and M(i,j) = int v b_i b_j with weights given at the Gauss points.
void weighted_univariate(const SplineBasis& basis, const QuadratureRule& rule, const Vector& nu, const Vector& beta,
                         Matrix& K, Matrix& M);
inline void univariate_matrices(const SplineBasis& basis, Matrix& K, Matrix& M) {
    const QuadratureRule rule = gauss_rule(basis);
    weighted_univariate(basis, rule, Vector::Ones(rule.size()), Vector::Ones(rule.size()), K, M);
}

/// Coefficient tensor of component l sampled on the tensor Gauss grid of the patch.
struct CoefficientField {
    std::vector<QuadratureRule> rules;  ///< per direction
    MultiIndexMap grid;                 ///< colex over quadrature points
    std::vector<Matrix> values;         ///< d x d per grid point

    /// grid.total() x d matrix of diagonal entries.
    Matrix diagonals() const;
};

CoefficientField coefficient_tensor(const Patch& patch, const ElasticityCoefficients& coeffs, int l);

/// c_m(eta) ~ nu_m(eta_m) * prod_{n != m} beta_n(eta_n), values at the 1D quadrature points.
struct SeparableCoefficient {
    std::vector<Vector> nu;
    std::vector<Vector> beta;
    /// Root mean square of the log-space residual.
    double residual = 0.0;

    /// Model value for diagonal entry m at grid multi-index q.
    double value(int m, const std::vector<Index>& q) const;
};

/// Alternating log-space fit (3 sweeps); ApproximationDomainError on non-positive samples.
SeparableCoefficient separable_fit(const Matrix& diagonals, const std::vector<Index>& grid_sizes, int sweeps = 3);

/// Weighted univariate blocks of the geometry-inclusion variant for one component.
struct WeightedBlocks {
    std::vector<Matrix> K;  ///< per direction, weight nu_m
    std::vector<Matrix> M;  ///< per direction, weight beta_m
    SeparableCoefficient fit;

    /// sum_m K_m in slot m, M elsewhere
    KroneckerSum stiffness() const;
    KroneckerOperator mass() const;
};

WeightedBlocks weighted_blocks(const Patch& patch, const ElasticityCoefficients& coeffs, int l);

}  // namespace afieti

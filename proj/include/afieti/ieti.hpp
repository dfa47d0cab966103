#pragma once

#include "afieti/assembly.hpp"
#include "afieti/constraints.hpp"
#include "afieti/fdsolver.hpp"
#include "afieti/geometry.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <string>
#include <vector>

namespace afieti {

enum class LocalSolver { Exact, Inexact, Geo };

struct Variant {
    LocalSolver solver = LocalSolver::Inexact;
    bool nonredundant = true;

    /// exact-nr, inexact-nr, geo-nr, exact-s, inexact-s, geo-s
    static Variant parse(const std::string& name);
    std::string name() const;
    bool operator==(const Variant&) const = default;
};

/// Everything the AF-IETI operators need from one patch after assembly.
struct PatchSystem {
    SparseMatrix A;     ///< physical stiffness, component-major
    SparseMatrix M;     ///< vector-valued mass
    double H = 1.0;     ///< patch diameter
};

using SparseLLT = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;

/// Saddle operator, block preconditioner and local solvers for one variant.
class IetiSolver {
public:
    IetiSolver(const MultiPatch& mp, const ElasticityCoefficients& coeffs, const std::vector<PatchSystem>& patches,
               const ConstraintSystem& constraints, Variant variant);

    Index primal_size() const { return cs_.layout().total; }
    Index dual_size() const { return cs_.num_constraints(); }
    Index size() const { return primal_size() + dual_size(); }
    const Variant& variant() const { return variant_; }

    /// (A w + B^T P_chi chi, P_chi B w)
    Vector apply_saddle(const Vector& x) const;
    /// (P_u P_A^{-1} P_u r_w, P_chi P_S P_chi r_chi)
    Vector apply_preconditioner(const Vector& x) const;

    Vector apply_PA_inverse(const Vector& r) const;
    Vector apply_PS(const Vector& lambda) const;

    /// Local Schur-type operator of the configured variant on the vector-valued interface of patch k.
    Vector apply_local_schur(Index k, const Vector& t) const;
    /// Exact S^(k) regardless of the variant.
    Vector apply_exact_schur(Index k, const Vector& t) const;
    /// Vector-valued interface indices of patch k (component-major over the scalar gamma set).
    const IndexList& gamma_indices(Index k) const { return local_[static_cast<std::size_t>(k)].gamma; }

    /// Local P_A^{-1} block of patch k.
    Vector apply_local_PA_inverse(Index k, const Vector& r) const;

    /// Right-hand side (f - B^T lambda0, P_chi c) in the projected subspaces.
    Vector saddle_rhs(const Vector& f, const Vector& lambda0) const;

private:
    struct Local {
        IndexList gamma, interior;  // vector-valued local indices
        std::shared_ptr<SparseLLT> PA;    // exact: A + H^-2 M
        mutable std::shared_ptr<SparseLLT> AII;  // exact interior solves, built lazily for inexact variants
        SparseMatrix A_GG, A_GI, A_IG;
        std::vector<FdFactorization> fd_full;      // per component
        std::vector<FdFactorization> fd_interior;  // per component
        std::vector<KroneckerSum> stiffness;       // A^_l or A~_l per component
        std::vector<Vector> schur_scaling;         // geo: sqrt(D_S,l) on the scalar gamma set
        double scale = 1.0;                        // H^{d-2} for the inexact variant
    };

    const MultiPatch& mp_;
    ElasticityCoefficients coeffs_;
    const std::vector<PatchSystem>& patches_;
    const ConstraintSystem& cs_;
    Variant variant_;
    std::vector<Local> local_;
};

/// Extreme eigenvalue magnitudes of the preconditioned operator on range(A) x ker(G^T).
struct SpectralEstimate {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
};

/// Dense probe for small problems; reverse_basis permutes the subspace bases (for independence checks).
SpectralEstimate spectral_probe(const IetiSolver& solver, const ConstraintSystem& cs, bool reverse_basis = false);

/// Orthonormal basis of the orthogonal complement of range(V).
Matrix orthogonal_complement(const Matrix& V);

/// Rows/columns selection of a sparse matrix.
SparseMatrix submatrix(const SparseMatrix& A, const IndexList& rows, const IndexList& cols);

}  // namespace afieti

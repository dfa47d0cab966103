#pragma once

#include "afieti/dense_la.hpp"
#include "afieti/geometry.hpp"
#include "afieti/types.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <vector>

namespace afieti {

/// Offsets of the per-patch vector-valued blocks inside the stacked global vector.
struct DofLayout {
    int dim = 0;
    std::vector<Index> offset;   ///< first global index of patch k
    std::vector<Index> nscalar;  ///< scalar functions of patch k
    Index total = 0;

    explicit DofLayout(const MultiPatch& mp);
    DofLayout() = default;

    Index patch_size(Index k) const { return dim * nscalar[static_cast<std::size_t>(k)]; }
    Index global(Index k, int component, Index i) const {
        return offset[static_cast<std::size_t>(k)] + component * nscalar[static_cast<std::size_t>(k)] + i;
    }
    Index num_patches() const { return static_cast<Index>(offset.size()); }
    auto segment(Vector& v, Index k) const { return v.segment(offset[static_cast<std::size_t>(k)], patch_size(k)); }
    auto segment(const Vector& v, Index k) const { return v.segment(offset[static_cast<std::size_t>(k)], patch_size(k)); }
};

enum class RowKind { Continuity, Dirichlet };

struct RowInfo {
    RowKind kind = RowKind::Continuity;
    int component = 0;
    int patch = 0;       ///< Dirichlet: pinned patch; continuity: slave (or later chain member) patch
    Index dof = 0;       ///< scalar index on that patch
    int interface = -1;  ///< continuity rows from nested interfaces; -1 for conforming chains
};

/// Rigid-body modes of one patch: translations then infinitesimal rotations built from the control net.
Matrix rigid_modes(const Patch& patch);

/// The all-floating constraint system: B, Dirichlet values, R, G = B R and both projectors.
class ConstraintSystem {
public:
    /// dirichlet may be empty (homogeneous data). Throws RedundantConstraints, RigidModeError.
    ConstraintSystem(const MultiPatch& mp, const std::vector<SparseMatrix>& stiffness,
                     const std::function<Vector(const Vector&)>& dirichlet = {});

    const DofLayout& layout() const { return layout_; }
    const SparseMatrix& B() const { return B_; }
    const std::vector<RowInfo>& rows() const { return rows_; }
    Index num_constraints() const { return B_.rows(); }
    /// Right-hand side of B u = c (Dirichlet values, zero on continuity rows).
    const Vector& values() const { return c_; }
    const DofPartition& partition(Index k) const { return parts_[static_cast<std::size_t>(k)]; }
    const Matrix& rigid(Index k) const { return R_[static_cast<std::size_t>(k)]; }
    Index rigid_offset(Index k) const { return roff_[static_cast<std::size_t>(k)]; }
    Index num_rigid() const { return roff_.back(); }
    const Matrix& G() const { return G_; }
    /// Scalar indices pinned by Dirichlet faces, per patch.
    const IndexList& dirichlet_dofs(Index k) const { return pinned_[static_cast<std::size_t>(k)]; }

    Vector apply_R(const Vector& alpha) const;
    Vector apply_Rt(const Vector& w) const;

    Vector apply_P_chi(const Vector& v) const;
    Vector apply_P_u(const Vector& w) const;
    /// lambda0 = G (G^T G)^{-1} R^T f
    Vector initial_multiplier(const Vector& f) const;

    /// u = w + R (G^T G)^{-1} G^T (c - B w), lambda = lambda0 + chi.
    void recover_solution(const Vector& w, const Vector& chi, const Vector& lambda0, Vector& u, Vector& lambda) const;

    /// (B B^T)^{-1} v with the factorization computed once.
    Vector solve_BBt(const Vector& v) const;

private:
    void build_rows(const MultiPatch& mp, const std::function<Vector(const Vector&)>& dirichlet);

    DofLayout layout_;
    std::vector<DofPartition> parts_;
    std::vector<IndexList> pinned_;
    SparseMatrix B_;
    std::vector<RowInfo> rows_;
    Vector c_;
    std::vector<Matrix> R_;
    std::vector<Index> roff_;
    std::vector<DenseCholesky> RtR_;
    Matrix G_;
    DenseCholesky GtG_;
    std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> BBt_;
};

}  // namespace afieti

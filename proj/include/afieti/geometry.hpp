#pragma once

#include "afieti/bspline.hpp"
#include "afieti/kron.hpp"
#include "afieti/types.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace afieti {

/// Tensor-product B-spline image of [0,1]^d. The bases double as the discretization space.
class Patch {
public:
    Patch() = default;
    /// control: one row per basis function (colex order), d columns.
    Patch(std::vector<SplineBasis> bases, Matrix control);

    int dim() const { return static_cast<int>(bases_.size()); }
    const SplineBasis& basis(int direction) const { return bases_[static_cast<std::size_t>(direction)]; }
    const std::vector<SplineBasis>& bases() const { return bases_; }
    const Matrix& control() const { return control_; }
    const MultiIndexMap& index_map() const { return map_; }
    /// Scalar basis functions n = prod m_l.
    Index num_basis() const { return map_.total(); }
    std::vector<Index> sizes() const { return map_.sizes(); }

    Vector map_point(const Vector& eta) const;

private:
    std::vector<SplineBasis> bases_;
    Matrix control_;
    MultiIndexMap map_;
};

/// Builds a patch whose control points interpolate F at the tensor Greville grid.
/// Exact whenever F lies in the spline space (e.g. multilinear maps for p >= 1).
Patch interpolate_patch(std::vector<SplineBasis> bases, const std::function<Vector(const Vector&)>& F);

/// Coefficients c (colex, one column per field component) interpolating g at the Greville grid.
Matrix interpolate_coefficients(const std::vector<SplineBasis>& bases,
                                const std::function<Vector(const Vector&)>& g, int components);

struct JacobianInfo {
    Matrix J;       ///< J(i, l) = dF_i / d eta_l
    double det = 0.0;
    Matrix inverse;
};

JacobianInfo jacobian(const Patch& patch, const Vector& eta);

/// Max pairwise distance of the control net (convex-hull bound on the patch diameter).
double patch_diameter(const Patch& patch);

/// Values and first derivatives of all nonzero tensor basis functions at one parametric point.
struct PointBasis {
    IndexList indices;  ///< scalar (colex) indices
    Matrix table;       ///< (d+1) x count: row 0 values, row 1+l derivative along eta_l
};

PointBasis eval_point(const Patch& patch, const Vector& eta);

/// Faces are numbered 2*direction + side (side 0 at eta_dir = 0, side 1 at eta_dir = 1).
inline int face_direction(int face) { return face / 2; }
inline int face_side(int face) { return face % 2; }
/// Tangential directions of a face in increasing order.
std::vector<int> face_tangents(int dim, int face);
/// Parametric point on a face for face coordinates s (one per tangential direction).
Vector face_point(int dim, int face, const Vector& s);
/// Scalar indices of the functions with nonzero trace on a face, colex over the tangential directions.
IndexList face_dofs(const Patch& patch, int face);

/// Face-to-face parameter relation: tangential coordinate t of side a maps to tangential
/// coordinate perm[t] of side b, mirrored when flip[t] is set.
struct Orientation {
    std::vector<int> perm;
    std::vector<bool> flip;

    static Orientation identity(int face_dim);
    Orientation inverse() const;
    Vector apply(const Vector& s_a) const;
    bool operator==(const Orientation&) const = default;
};

enum class Nesting { Conforming, Nested };
enum class BoundaryType { Dirichlet, Neumann };

/// Interface between two patch faces. After MultiPatch normalization, side b is the slave
/// side: for nested interfaces it is the refined side.
struct Interface {
    int patch_a = 0;
    int face_a = 0;
    int patch_b = 0;
    int face_b = 0;
    Orientation orientation;
    Nesting nesting = Nesting::Conforming;
};

struct BoundaryFace {
    int patch = 0;
    int face = 0;
    BoundaryType type = BoundaryType::Dirichlet;
};

class MultiPatch {
public:
    MultiPatch() = default;
    explicit MultiPatch(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    int add_patch(Patch patch);
    /// fine_side 0 marks side a as the refined one; the interface is stored with sides swapped then.
    void add_interface(Interface iface, int fine_side = 1);
    void set_boundary(int patch, int face, BoundaryType type);

    Index num_patches() const { return static_cast<Index>(patches_.size()); }
    const Patch& patch(Index k) const { return patches_[static_cast<std::size_t>(k)]; }
    const std::vector<Patch>& patches() const { return patches_; }
    const std::vector<Interface>& interfaces() const { return interfaces_; }
    const std::vector<BoundaryFace>& boundary() const { return boundary_; }

    /// Dirichlet/Neumann tag of an outer face; ArgumentError for interface faces.
    BoundaryType boundary_type(int patch, int face) const;
    bool is_interface_face(int patch, int face) const;

    /// Every face is either on exactly one interface or tagged; sampled interface points coincide.
    void validate(double tol = 1e-10) const;

private:
    int dim_ = 0;
    std::vector<Patch> patches_;
    std::vector<Interface> interfaces_;
    std::vector<BoundaryFace> boundary_;
};

/// Scalar-level interface/interior split of one patch.
struct DofPartition {
    IndexList gamma;     ///< functions with nonzero trace on the patch boundary
    IndexList interior;  ///< the rest, an (m_1-2) x ... x (m_d-2) box in colex order
    std::vector<Index> position;  ///< scalar index -> position inside gamma or interior
    std::vector<bool> on_gamma;
    Index num_dof = 0;

    Index gamma_size() const { return static_cast<Index>(gamma.size()); }
    Index interior_size() const { return static_cast<Index>(interior.size()); }
};

DofPartition partition_dofs(const Patch& patch);

/// Slave face DOFs expressed through master face DOFs: u_slave[j] = sum_i w_ji u_master[i].
struct InterfaceCoupling {
    IndexList slave_dofs;  ///< scalar indices on patch_b
    std::vector<std::vector<std::pair<Index, double>>> weights;  ///< per slave DOF: (master scalar index, weight)
};

InterfaceCoupling match_interface_dofs(const MultiPatch& mp, const Interface& iface);

}  // namespace afieti

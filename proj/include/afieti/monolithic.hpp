#pragma once

#include "afieti/geometry.hpp"
#include "afieti/types.hpp"

#include <functional>
#include <vector>

namespace afieti {

/// Continuous global basis expressed through the stacked patch coefficients: u = E y + u0.
struct ReducedBasis {
    SparseMatrix E;  ///< total x (d * free)
    Vector u0;       ///< Dirichlet lift
    Index num_free = 0;  ///< scalar free functions
};

/// Eliminates conforming copies, nested slaves and Dirichlet DOFs. Dirichlet coefficients come from
/// face interpolation of `dirichlet` at the Greville points (zero when empty).
ReducedBasis reduced_basis(const MultiPatch& mp, const std::function<Vector(const Vector&)>& dirichlet = {});

/// Direct solve of the constrained global system with patch stiffness blocks and stacked load f.
Vector monolithic_solve(const MultiPatch& mp, const std::vector<SparseMatrix>& stiffness, const Vector& f,
                        const std::function<Vector(const Vector&)>& dirichlet = {});

}  // namespace afieti

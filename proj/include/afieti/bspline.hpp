#pragma once

#include "afieti/types.hpp"

#include <vector>

namespace afieti {

/// Open knot vector on [0,1] with endpoint multiplicity p+1.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(std::vector<double> knots, int degree);

    /// n_el equal spans, interior knots of multiplicity p - continuity.
    static KnotVector uniform(int degree, int elements, int continuity = -2);

    int degree() const { return degree_; }
    /// Number of basis functions m (knots().size() == m + p + 1).
    Index size() const { return static_cast<Index>(knots_.size()) - degree_ - 1; }
    const std::vector<double>& knots() const { return knots_; }
    double operator[](Index i) const { return knots_[static_cast<std::size_t>(i)]; }

    /// Distinct knot values, 0 and 1 included.
    std::vector<double> breakpoints() const;
    /// Largest span length h.
    double mesh_size() const;
    /// Smallest nonempty span divided by h (the quasi-uniformity constant).
    double quasi_uniformity() const;

    /// The same knots mirrored by x -> 1 - x.
    KnotVector reversed() const;

    bool operator==(const KnotVector& other) const = default;

private:
    std::vector<double> knots_;
    int degree_ = 0;
};

/// Univariate B-spline basis with cached breakpoints.
class SplineBasis {
public:
    SplineBasis() = default;
    explicit SplineBasis(KnotVector knots);

    const KnotVector& knots() const { return knots_; }
    int degree() const { return knots_.degree(); }
    Index size() const { return knots_.size(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    Index num_elements() const { return static_cast<Index>(breakpoints_.size()) - 1; }
    double mesh_size() const { return h_; }

    /// Knot span index k with knot[k] <= x < knot[k+1]; x == 1 maps to the last nonempty span.
    Index find_span(double x) const;

    /// Greville abscissae, one per basis function.
    std::vector<double> greville() const;

private:
    KnotVector knots_;
    std::vector<double> breakpoints_;
    double h_ = 0.0;
};

struct BasisValues {
    Index first = 0;   ///< index of the first active function
    Vector values;     ///< p+1 values
};

struct BasisDerivatives {
    Index first = 0;
    Matrix table;      ///< (order+1) x (p+1); row r holds the r-th derivatives
};

/// Per-element Gauss rule over the breakpoints of a basis.
struct QuadratureRule {
    int points_per_element = 0;
    Index num_elements = 0;
    std::vector<double> points;
    std::vector<double> weights;

    Index size() const { return static_cast<Index>(points.size()); }
    /// Element owning quadrature point q.
    Index element_of(Index q) const { return q / points_per_element; }
};

/// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights);

BasisValues eval_basis(const SplineBasis& basis, double x);
BasisDerivatives eval_basis_derivatives(const SplineBasis& basis, double x, int order);

/// T with B_coarse(x) = T^T B_fine(x); built by repeated single-knot insertion.
Matrix knot_insertion_matrix(const KnotVector& coarse, const KnotVector& fine);

/// Default q = p + 1.
QuadratureRule gauss_rule(const SplineBasis& basis, int points_per_element = 0);

/// Collocation matrix C(i, j) = b_j(x_i).
Matrix collocation_matrix(const SplineBasis& basis, const std::vector<double>& x);

}  // namespace afieti

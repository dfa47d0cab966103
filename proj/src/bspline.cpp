#include "afieti/bspline.hpp"

#include "afieti/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace afieti {

namespace {

constexpr double kKnotTol = 1e-12;

}  // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree) : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 1) throw ArgumentError("knot vector degree must be positive");
    const auto p = static_cast<std::size_t>(degree_);
    if (knots_.size() < 2 * (p + 1)) throw ArgumentError("knot vector too short for its degree");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        if (knots_[i + 1] < knots_[i]) throw ArgumentError("knot vector must be nondecreasing");
    }
    for (std::size_t i = 0; i <= p; ++i) {
        if (knots_[i] != 0.0 || knots_[knots_.size() - 1 - i] != 1.0) {
            throw ArgumentError("knot vector must be open on [0,1]");
        }
    }
    std::size_t run = 1;
    for (std::size_t i = p + 1; i + p + 1 < knots_.size(); ++i) {
        run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
        if (knots_[i] == 0.0 || knots_[i] == 1.0 || run > p + 1) throw ArgumentError("interior knot multiplicity exceeds p+1");
    }
}

KnotVector KnotVector::uniform(int degree, int elements, int continuity) {
    if (elements < 1) throw ArgumentError("need at least one element");
    if (continuity == -2) continuity = degree - 1;
    if (continuity < -1 || continuity >= degree) throw ArgumentError("continuity must lie in [-1, p-1]");
    const int mult = degree - continuity;
    std::vector<double> k(static_cast<std::size_t>(degree + 1), 0.0);
    for (int e = 1; e < elements; ++e) {
        const double x = static_cast<double>(e) / static_cast<double>(elements);
        for (int r = 0; r < mult; ++r) k.push_back(x);
    }
    for (int r = 0; r <= degree; ++r) k.push_back(1.0);
    return KnotVector(std::move(k), degree);
}

std::vector<double> KnotVector::breakpoints() const {
    std::vector<double> b;
    for (double x : knots_) {
        if (b.empty() || x > b.back()) b.push_back(x);
    }
    return b;
}

double KnotVector::mesh_size() const {
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) h = std::max(h, knots_[i + 1] - knots_[i]);
    return h;
}

double KnotVector::quasi_uniformity() const {
    const double h = mesh_size();
    double smallest = h;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        const double len = knots_[i + 1] - knots_[i];
        if (len > 0.0) smallest = std::min(smallest, len);
    }
    return smallest / h;
}

KnotVector KnotVector::reversed() const {
    std::vector<double> r(knots_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i) r[i] = 1.0 - knots_[knots_.size() - 1 - i];
    return KnotVector(std::move(r), degree_);
}

SplineBasis::SplineBasis(KnotVector knots) : knots_(std::move(knots)) {
    breakpoints_ = knots_.breakpoints();
    h_ = knots_.mesh_size();
}

Index SplineBasis::find_span(double x) const {
    const auto& k = knots_.knots();
    const Index p = degree();
    const Index m = size();
    if (x >= 1.0) {
        // closed last element: last nonempty span
        Index s = m - 1;
        while (s > p && k[static_cast<std::size_t>(s)] == k[static_cast<std::size_t>(s + 1)]) --s;
        return s;
    }
    auto it = std::upper_bound(k.begin() + p, k.begin() + m + 1, x);
    return static_cast<Index>(it - k.begin()) - 1;
}

std::vector<double> SplineBasis::greville() const {
    const auto& k = knots_.knots();
    const int p = degree();
    std::vector<double> g(static_cast<std::size_t>(size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        double s = 0.0;
        for (int j = 1; j <= p; ++j) s += k[i + static_cast<std::size_t>(j)];
        g[i] = s / p;
    }
    return g;
}

void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
    if (q < 1) throw ArgumentError("quadrature needs at least one point");
    nodes.assign(static_cast<std::size_t>(q), 0.0);
    weights.assign(static_cast<std::size_t>(q), 0.0);
    for (int i = 0; i < q; ++i) {
        // Newton on P_q starting from the Chebyshev-like guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (q == 1) p1 = x;
            for (int n = 2; n <= q; ++n) {
                const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_q(x), p0 = P_{q-1}(x)
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int n = 2; n <= q; ++n) {
            const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
            p0 = p1;
            p1 = p2;
        }
        dp = q * (x * p1 - p0) / (x * x - 1.0);
        const auto idx = static_cast<std::size_t>(q - 1 - i);
        nodes[idx] = 0.5 * (x + 1.0);
        weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2) scaled by 1/2
    }
}

BasisValues eval_basis(const SplineBasis& basis, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("basis evaluation point outside [0,1]");
    const auto& U = basis.knots().knots();
    const int p = basis.degree();
    const Index span = basis.find_span(x);
    const auto i = static_cast<std::size_t>(span);
    std::vector<double> left(static_cast<std::size_t>(p) + 1), right(static_cast<std::size_t>(p) + 1);
    BasisValues out;
    out.first = span - p;
    out.values = Vector::Zero(p + 1);
    out.values[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        left[ju] = x - U[i + 1 - ju];
        right[ju] = U[i + ju] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const auto ru = static_cast<std::size_t>(r);
            const double denom = right[ru + 1] + left[ju - ru];
            const double temp = denom == 0.0 ? 0.0 : out.values[r] / denom;
            out.values[r] = saved + right[ru + 1] * temp;
            saved = left[ju - ru] * temp;
        }
        out.values[j] = saved;
    }
    return out;
}

BasisDerivatives eval_basis_derivatives(const SplineBasis& basis, double x, int order) {
    const int p = basis.degree();
    if (order < 0 || order > p) throw ArgumentError("derivative order must lie in [0, p]");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("basis evaluation point outside [0,1]");
    const auto& U = basis.knots().knots();
    const Index span = basis.find_span(x);
    const auto i = static_cast<std::size_t>(span);

    Matrix ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<std::size_t>(p) + 1), right(static_cast<std::size_t>(p) + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        left[ju] = x - U[i + 1 - ju];
        right[ju] = U[i + ju] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const auto ru = static_cast<std::size_t>(r);
            ndu(j, r) = right[ru + 1] + left[ju - ru];
            const double temp = ndu(j, r) == 0.0 ? 0.0 : ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[ru + 1] * temp;
            saved = left[ju - ru] * temp;
        }
        ndu(j, j) = saved;
    }

    BasisDerivatives out;
    out.first = span - p;
    out.table = Matrix::Zero(order + 1, p + 1);
    for (int j = 0; j <= p; ++j) out.table(0, j) = ndu(j, p);

    Matrix a(2, p + 1);
    auto safe_div = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a.setZero();
        a(0, 0) = 1.0;
        for (int k = 1; k <= order; ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a(s2, 0) = safe_div(a(s1, 0), ndu(pk + 1, rk));
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = safe_div(a(s1, j) - a(s1, j - 1), ndu(pk + 1, rk + j));
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = safe_div(-a(s1, k - 1), ndu(pk + 1, r));
                d += a(s2, k) * ndu(r, pk);
            }
            out.table(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double fac = p;
    for (int k = 1; k <= order; ++k) {
        out.table.row(k) *= fac;
        fac *= (p - k);
    }
    return out;
}

namespace {

// Single insertion of x into U; returns the (m+1) x m refinement matrix and updates U.
Matrix insert_once(std::vector<double>& U, int p, double x) {
    const auto m = static_cast<Index>(U.size()) - p - 1;
    auto it = std::upper_bound(U.begin(), U.end(), x);
    const Index k = static_cast<Index>(it - U.begin()) - 1;
    Matrix T = Matrix::Zero(m + 1, m);
    for (Index i = 0; i <= m; ++i) {
        if (i <= k - p) {
            T(i, i) = 1.0;
        } else if (i >= k + 1) {
            T(i, i - 1) = 1.0;
        } else {
            const double ui = U[static_cast<std::size_t>(i)];
            const double alpha = (x - ui) / (U[static_cast<std::size_t>(i + p)] - ui);
            T(i, i) = alpha;
            T(i, i - 1) = 1.0 - alpha;
        }
    }
    U.insert(it, x);
    return T;
}

}  // namespace

Matrix knot_insertion_matrix(const KnotVector& coarse, const KnotVector& fine) {
    if (coarse.degree() != fine.degree()) throw ArgumentError("knot insertion needs equal degrees");
    const auto& c = coarse.knots();
    const auto& f = fine.knots();
    std::vector<double> extra;
    std::size_t ic = 0;
    for (double x : f) {
        if (ic < c.size() && std::abs(c[ic] - x) <= kKnotTol) {
            ++ic;
        } else {
            extra.push_back(x);
        }
    }
    if (ic != c.size()) throw ArgumentError("knot vectors are not nested");
    std::vector<double> U = c;
    Matrix T = Matrix::Identity(coarse.size(), coarse.size());
    for (double x : extra) {
        if (x <= 0.0 || x >= 1.0) throw ArgumentError("knot vectors are not nested");
        T = insert_once(U, coarse.degree(), x) * T;
    }
    return T;
}

QuadratureRule gauss_rule(const SplineBasis& basis, int points_per_element) {
    const int q = points_per_element > 0 ? points_per_element : basis.degree() + 1;
    std::vector<double> nodes, weights;
    gauss_legendre(q, nodes, weights);
    QuadratureRule rule;
    rule.points_per_element = q;
    rule.num_elements = basis.num_elements();
    const auto& b = basis.breakpoints();
    for (std::size_t e = 0; e + 1 < b.size(); ++e) {
        const double a = b[e], len = b[e + 1] - b[e];
        for (int k = 0; k < q; ++k) {
            rule.points.push_back(a + len * nodes[static_cast<std::size_t>(k)]);
            rule.weights.push_back(len * weights[static_cast<std::size_t>(k)]);
        }
    }
    return rule;
}

Matrix collocation_matrix(const SplineBasis& basis, const std::vector<double>& x) {
    Matrix C = Matrix::Zero(static_cast<Index>(x.size()), basis.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto v = eval_basis(basis, x[i]);
        C.row(static_cast<Index>(i)).segment(v.first, v.values.size()) = v.values.transpose();
    }
    return C;
}

}  // namespace afieti

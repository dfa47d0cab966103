#include "afieti/problem.hpp"

#include "afieti/error.hpp"

#include <cmath>

namespace afieti {

Matrix Manufactured::stress(const Vector& x) const {
    const Matrix G = grad(x);
    const Matrix eps = 0.5 * (G + G.transpose());
    return 2.0 * coeffs.mu * eps + coeffs.lambda * eps.trace() * Matrix::Identity(dim, dim);
}

Vector Manufactured::traction(const Vector& x, const Vector& n) const { return stress(x) * n; }

LoadData Manufactured::load() const {
    LoadData ld;
    ld.body = body;
    const Manufactured self = *this;
    ld.traction = [self](const Vector& x, const Vector& n) { return self.traction(x, n); };
    return ld;
}

Manufactured manufactured_solution(int dim, const ElasticityCoefficients& coeffs) {
    coeffs.validate();
    Manufactured m;
    m.dim = dim;
    m.coeffs = coeffs;
    const double lam = coeffs.lambda, mu = coeffs.mu;
    if (dim == 2) {
        m.u = [](const Vector& p) {
            const double x = p[0], y = p[1];
            return Vector{{std::cos(x), std::sin(y) + x * x * y * y}};
        };
        m.grad = [](const Vector& p) {
            const double x = p[0], y = p[1];
            Matrix G(2, 2);
            G << -std::sin(x), 0.0, 2 * x * y * y, std::cos(y) + 2 * x * x * y;
            return G;
        };
        m.body = [lam, mu](const Vector& p) {
            const double x = p[0], y = p[1];
            return Vector{{-4 * lam * x * y + lam * std::cos(x) - 4 * mu * x * y + 2 * mu * std::cos(x),
                           -2 * lam * x * x + lam * std::sin(y) - 4 * mu * x * x - 2 * mu * y * y + 2 * mu * std::sin(y)}};
        };
    } else if (dim == 3) {
        m.u = [](const Vector& p) {
            const double x = p[0], y = p[1], z = p[2];
            const double xyz = x * y * z;
            return Vector{{std::cos(x), z * std::sin(y), xyz * xyz}};
        };
        m.grad = [](const Vector& p) {
            const double x = p[0], y = p[1], z = p[2];
            Matrix G(3, 3);
            G << -std::sin(x), 0.0, 0.0,
                 0.0, z * std::cos(y), std::sin(y),
                 2 * x * y * y * z * z, 2 * x * x * y * z * z, 2 * x * x * y * y * z;
            return G;
        };
        m.body = [lam, mu](const Vector& p) {
            const double x = p[0], y = p[1], z = p[2];
            const double x2 = x * x, y2 = y * y, z2 = z * z;
            return Vector{{-4 * lam * x * y2 * z + lam * std::cos(x) - 4 * mu * x * y2 * z + 2 * mu * std::cos(x),
                           -4 * lam * x2 * y * z + lam * z * std::sin(y) - 4 * mu * x2 * y * z + 2 * mu * z * std::sin(y),
                           -2 * lam * x2 * y2 - lam * std::cos(y) - 4 * mu * x2 * y2 - 2 * mu * x2 * z2 - 2 * mu * y2 * z2 -
                               mu * std::cos(y)}};
        };
    } else {
        throw ArgumentError("manufactured solutions exist for d = 2 and d = 3 only");
    }
    return m;
}

Patch uniform_patch(int dim, int degree, const std::vector<int>& elements, const std::function<Vector(const Vector&)>& F) {
    if (static_cast<int>(elements.size()) != dim) throw ArgumentError("one element count per direction is required");
    std::vector<SplineBasis> bases;
    for (int e : elements) bases.emplace_back(KnotVector::uniform(degree, e));
    return interpolate_patch(std::move(bases), F);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Affine box map [0,1]^d -> lo + diag(size) eta.
std::function<Vector(const Vector&)> box(const Vector& lo, const Vector& size) {
    return [lo, size](const Vector& eta) { return Vector(lo + size.cwiseProduct(eta)); };
}

Orientation ident(int dim) { return Orientation::identity(dim - 1); }

void check_options(const PresetOptions& o) {
    if (o.degree < 1 || o.degree > 8) throw ArgumentError("degree must lie in 1..8");
    if (o.elements < 1 || o.elements > 256) throw ArgumentError("elements per direction must lie in 1..256");
    if (o.patches < 1 || o.patches > 8) throw ArgumentError("patches per direction must lie in 1..8");
}

/// Two unit squares side by side along x; right patch refined by `ratio`.
MultiPatch two_squares(const PresetOptions& o, int ratio) {
    MultiPatch mp(2);
    const int e = o.elements;
    mp.add_patch(uniform_patch(2, o.degree, {e, e}, box(Vector{{0.0, 0.0}}, Vector{{1.0, 1.0}})));
    mp.add_patch(uniform_patch(2, o.degree, {ratio * e, ratio * e}, box(Vector{{1.0, 0.0}}, Vector{{1.0, 1.0}})));
    mp.add_interface({0, 1, 1, 0, ident(2), ratio == 1 ? Nesting::Conforming : Nesting::Nested});
    mp.set_boundary(0, 0, BoundaryType::Dirichlet);
    mp.set_boundary(1, 1, BoundaryType::Dirichlet);
    for (int k = 0; k < 2; ++k) {
        mp.set_boundary(k, 2, BoundaryType::Neumann);
        mp.set_boundary(k, 3, BoundaryType::Neumann);
    }
    return mp;
}

/// Quarter annulus 1 <= r <= 2 split at 45 degrees; eta_0 runs along the angle.
MultiPatch quarter_annulus(const PresetOptions& o) {
    MultiPatch mp(2);
    const int e = o.elements;
    for (int k = 0; k < 2; ++k) {
        const double t0 = 0.25 * kPi * k;
        mp.add_patch(uniform_patch(2, o.degree, {e, e}, [t0](const Vector& eta) {
            const double theta = t0 + 0.25 * kPi * eta[0];
            const double r = 1.0 + eta[1];
            return Vector{{r * std::cos(theta), r * std::sin(theta)}};
        }));
    }
    mp.add_interface({0, 1, 1, 0, ident(2), Nesting::Conforming});
    mp.set_boundary(0, 0, BoundaryType::Dirichlet);
    mp.set_boundary(1, 1, BoundaryType::Dirichlet);
    for (int k = 0; k < 2; ++k) {
        mp.set_boundary(k, 2, BoundaryType::Neumann);
        mp.set_boundary(k, 3, BoundaryType::Neumann);
    }
    return mp;
}

/// (0,1) x (0,3) x (0,1) as three stacked unit cubes refined by factors 1, 2, 4.
MultiPatch parallelepiped(const PresetOptions& o) {
    MultiPatch mp(3);
    for (int k = 0; k < 3; ++k) {
        const int e = o.elements << k;
        mp.add_patch(uniform_patch(3, o.degree, {e, e, e}, box(Vector{{0.0, double(k), 0.0}}, Vector{{1.0, 1.0, 1.0}})));
    }
    for (int k = 0; k < 2; ++k) mp.add_interface({k, 3, k + 1, 2, ident(3), Nesting::Nested});
    for (int k = 0; k < 3; ++k)
        for (int f = 0; f < 6; ++f)
            if (!mp.is_interface_face(k, f)) mp.set_boundary(k, f, BoundaryType::Dirichlet);
    return mp;
}

/// Unit cube split into N^3 equal cubes; Neumann on x = 0 and x = 1.
MultiPatch cube(const PresetOptions& o) {
    const int N = o.patches;
    MultiPatch mp(3);
    const double h = 1.0 / N;
    auto id = [N](int i, int j, int k) { return i + N * (j + N * k); };
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i)
                mp.add_patch(uniform_patch(3, o.degree, {o.elements, o.elements, o.elements},
                                           box(Vector{{i * h, j * h, k * h}}, Vector{{h, h, h}})));
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                if (i + 1 < N) mp.add_interface({id(i, j, k), 1, id(i + 1, j, k), 0, ident(3), Nesting::Conforming});
                if (j + 1 < N) mp.add_interface({id(i, j, k), 3, id(i, j + 1, k), 2, ident(3), Nesting::Conforming});
                if (k + 1 < N) mp.add_interface({id(i, j, k), 5, id(i, j, k + 1), 4, ident(3), Nesting::Conforming});
            }
    for (int p = 0; p < N * N * N; ++p)
        for (int f = 0; f < 6; ++f)
            if (!mp.is_interface_face(p, f))
                mp.set_boundary(p, f, face_direction(f) == 0 ? BoundaryType::Neumann : BoundaryType::Dirichlet);
    return mp;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"single-patch", "square-2patch", "square-2patch-nc", "distorted-2patch", "parallelepiped-nc", "cube-scal"};
}

Problem problem_from_domain(const std::string& name, MultiPatch domain, const ElasticityCoefficients& coeffs) {
    domain.validate();
    Problem pr;
    pr.name = name;
    pr.coeffs = coeffs;
    pr.exact = manufactured_solution(domain.dim(), coeffs);
    pr.domain = std::move(domain);
    return pr;
}

Problem make_preset(const std::string& name, const PresetOptions& options, const ElasticityCoefficients& coeffs) {
    check_options(options);
    MultiPatch mp;
    if (name == "single-patch") {
        mp = MultiPatch(2);
        mp.add_patch(uniform_patch(2, options.degree, {options.elements, options.elements},
                                   box(Vector{{0.0, 0.0}}, Vector{{1.0, 1.0}})));
        for (int f = 0; f < 4; ++f) mp.set_boundary(0, f, BoundaryType::Dirichlet);
    } else if (name == "square-2patch") {
        mp = two_squares(options, 1);
    } else if (name == "square-2patch-nc") {
        mp = two_squares(options, 2);
    } else if (name == "distorted-2patch") {
        mp = quarter_annulus(options);
    } else if (name == "parallelepiped-nc") {
        mp = parallelepiped(options);
    } else if (name == "cube-scal") {
        mp = cube(options);
    } else {
        throw ArgumentError("unknown preset '" + name + "'");
    }
    Problem pr = problem_from_domain(name, std::move(mp), coeffs);
    pr.options = options;
    return pr;
}

}  // namespace afieti

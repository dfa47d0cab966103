#pragma once

#include "afieti/assembly.hpp"
#include "afieti/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace afieti {

/// Closed-form displacement with its gradient and the induced elasticity data.
struct Manufactured {
    int dim = 0;
    ElasticityCoefficients coeffs;
    std::function<Vector(const Vector&)> u;
    /// grad(i, j) = d u_i / d x_j
    std::function<Matrix(const Vector&)> grad;
    /// f = -div sigma(u)
    std::function<Vector(const Vector&)> body;

    Matrix stress(const Vector& x) const;
    /// sigma(u) n
    Vector traction(const Vector& x, const Vector& n) const;
    LoadData load() const;
};

/// 2D: u = (cos x, sin y + (x y)^2); 3D: u = (cos x, z sin y, (x y z)^2).
Manufactured manufactured_solution(int dim, const ElasticityCoefficients& coeffs);

struct PresetOptions {
    int degree = 2;
    int elements = 4;      ///< per direction on the coarsest patch
    int patches = 2;       ///< per direction, cube preset only
};

struct Problem {
    std::string name;
    MultiPatch domain;
    ElasticityCoefficients coeffs;
    Manufactured exact;
    PresetOptions options;
};

std::vector<std::string> preset_names();
/// ArgumentError for unknown names or invalid options.
Problem make_preset(const std::string& name, const PresetOptions& options,
                    const ElasticityCoefficients& coeffs = ElasticityCoefficients{});
/// Problem on a domain read from a multipatch file; the manufactured solution follows its dimension.
Problem problem_from_domain(const std::string& name, MultiPatch domain,
                            const ElasticityCoefficients& coeffs = ElasticityCoefficients{});

/// Patch interpolating F over [0,1]^d with uniform maximally smooth knot vectors.
Patch uniform_patch(int dim, int degree, const std::vector<int>& elements, const std::function<Vector(const Vector&)>& F);

}  // namespace afieti

#pragma once

#include "afieti/constraints.hpp"
#include "afieti/ieti.hpp"
#include "afieti/minres.hpp"
#include "afieti/problem.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace afieti {

struct ErrorNorms {
    double l2 = 0.0;  ///< ||u_h - u||_L2
    double h1 = 0.0;  ///< |u_h - u|_H1
};

/// Patchwise Gauss quadrature (p + 3 points per direction) of the error against a closed-form field.
ErrorNorms error_norms(const MultiPatch& mp, const Vector& u, const std::function<Vector(const Vector&)>& exact,
                       const std::function<Matrix(const Vector&)>& exact_grad);

/// Displacement of the stacked coefficient vector at a parametric point of patch k.
Vector evaluate_field(const MultiPatch& mp, const Vector& u, Index k, const Vector& eta);

/// Sampled constraint violations of a stacked field.
struct ConstraintViolation {
    double interface_jump = 0.0;
    double dirichlet_trace = 0.0;  ///< max |u_h - u| on Dirichlet faces
};
ConstraintViolation constraint_violation(const MultiPatch& mp, const Vector& u,
                                         const std::function<Vector(const Vector&)>& dirichlet, int samples = 7);

/// Assembled patch operators, load and constraints of a problem. Keeps a reference to the problem.
struct Discretization {
    const Problem* problem = nullptr;
    std::vector<PatchSystem> patches;
    std::vector<SparseMatrix> stiffness;
    Vector f;  ///< stacked load
    std::unique_ptr<ConstraintSystem> constraints;

    Discretization() = default;
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;
};

/// Fills `out` in place so the constraint system references stay valid.
void discretize(const Problem& problem, Discretization& out);

struct IetiResult {
    Vector u;
    Vector lambda;
    SolveReport report;
};

/// MINRES on the AF-IETI saddle system; max_iter <= 0 selects 10 * N_c + 100.
IetiResult solve_ieti(const Discretization& disc, Variant variant, double tol, int max_iter = 0);

/// Monolithic oracle on the same discretization.
Vector solve_direct(const Discretization& disc);

struct RunConfig {
    std::string preset = "square-2patch";
    std::string domain_file;  ///< overrides preset when set
    PresetOptions options;
    ElasticityCoefficients coeffs;
    Variant variant;
    double tol = 1e-8;
    int max_iter = 0;
    std::string csv;
    unsigned seed = 1;

    /// ArgumentError on out-of-range values.
    void validate() const;
};

struct ExperimentRow {
    std::string preset;
    int p = 0;
    int n_el = 0;
    int n_patch = 0;
    std::string variant;
    int iters = 0;
    double relres = 0.0;
    double l2_err = 0.0;
    double h1_err = 0.0;
    double seconds = 0.0;
    bool converged = false;
};

/// Preset or file-backed problem of a configuration.
Problem build_problem(const RunConfig& config);
ExperimentRow run_experiment(const RunConfig& config);

/// Grid of runs; empty lists fall back to the base configuration value.
struct SweepConfig {
    RunConfig base;
    std::vector<int> degrees;
    std::vector<int> elements;
    std::vector<int> patches;  ///< used by the cube preset only
    std::vector<Variant> variants;
};

/// Rows in the order degree, elements, patches, variant (last fastest). Each problem is assembled once.
std::vector<ExperimentRow> run_sweep(const SweepConfig& config);

extern const char* const kCsvHeader;
void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);
/// ParseError on a wrong header or malformed row.
std::vector<ExperimentRow> read_csv(std::istream& is);

}  // namespace afieti

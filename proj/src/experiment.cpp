#include "afieti/experiment.hpp"

#include "afieti/assembly.hpp"
#include "afieti/element.hpp"
#include "afieti/error.hpp"
#include "afieti/geometry_io.hpp"
#include "afieti/monolithic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace afieti {

const char* const kCsvHeader = "preset,p,n_el,n_patch,variant,iters,relres,l2_err,h1_err,seconds";

namespace {

int max_degree(const Patch& patch) {
    int p = 0;
    for (int l = 0; l < patch.dim(); ++l) p = std::max(p, patch.basis(l).degree());
    return p;
}

std::vector<int> neumann_faces(const MultiPatch& mp, Index k) {
    std::vector<int> out;
    for (const auto& bf : mp.boundary())
        if (bf.patch == k && bf.type == BoundaryType::Neumann) out.push_back(bf.face);
    std::sort(out.begin(), out.end());
    return out;
}

Vector sample_face_coordinates(int dim, int samples, Index q) {
    Vector s(dim - 1);
    s[0] = (static_cast<double>(q % samples) + 0.5) / samples;
    if (dim == 3) s[1] = (static_cast<double>(q / samples) + 0.5) / samples;
    return s;
}

}  // namespace

ErrorNorms error_norms(const MultiPatch& mp, const Vector& u, const std::function<Vector(const Vector&)>& exact,
                       const std::function<Matrix(const Vector&)>& exact_grad) {
    const DofLayout layout(mp);
    if (u.size() != layout.total) throw ArgumentError("field size does not match the multipatch");
    const int d = mp.dim();
    double l2 = 0.0, h1 = 0.0;
    for (Index k = 0; k < mp.num_patches(); ++k) {
        const Patch& patch = mp.patch(k);
        const Index n = patch.num_basis();
        const auto uk = layout.segment(u, k);
        ElementIterator it(patch, max_degree(patch) + 3);
        it.run([&](const ElementData& ed) {
            const Index nloc = static_cast<Index>(ed.dofs.size());
            Matrix coef(nloc, d);
            for (Index a = 0; a < nloc; ++a)
                for (int c = 0; c < d; ++c) coef(a, c) = uk[c * n + ed.dofs[static_cast<std::size_t>(a)]];
            const Matrix vals = ed.phi.transpose() * coef;  // npts x d
            for (Index q = 0; q < ed.weight.size(); ++q) {
                const Vector x = ed.x.col(q);
                l2 += ed.weight[q] * (vals.row(q).transpose() - exact(x)).squaredNorm();
                const Matrix G = exact_grad(x);
                double g2 = 0.0;
                for (int r = 0; r < d; ++r) {
                    const Vector dr = coef.transpose() * ed.grad[static_cast<std::size_t>(r)].col(q);
                    g2 += (dr - G.col(r)).squaredNorm();
                }
                h1 += ed.weight[q] * g2;
            }
        });
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

Vector evaluate_field(const MultiPatch& mp, const Vector& u, Index k, const Vector& eta) {
    const DofLayout layout(mp);
    const Patch& patch = mp.patch(k);
    const Index n = patch.num_basis();
    const auto uk = layout.segment(u, k);
    const PointBasis pb = eval_point(patch, eta);
    Vector v = Vector::Zero(mp.dim());
    for (std::size_t a = 0; a < pb.indices.size(); ++a)
        for (int c = 0; c < mp.dim(); ++c) v[c] += pb.table(0, static_cast<Index>(a)) * uk[c * n + pb.indices[a]];
    return v;
}

ConstraintViolation constraint_violation(const MultiPatch& mp, const Vector& u,
                                         const std::function<Vector(const Vector&)>& dirichlet, int samples) {
    const int d = mp.dim();
    const Index count = d == 2 ? samples : samples * samples;
    ConstraintViolation out;
    for (const auto& iface : mp.interfaces()) {
        for (Index q = 0; q < count; ++q) {
            const Vector s = sample_face_coordinates(d, samples, q);
            const Vector ua = evaluate_field(mp, u, iface.patch_a, face_point(d, iface.face_a, s));
            const Vector ub = evaluate_field(mp, u, iface.patch_b, face_point(d, iface.face_b, iface.orientation.apply(s)));
            out.interface_jump = std::max(out.interface_jump, (ua - ub).lpNorm<Eigen::Infinity>());
        }
    }
    // Dirichlet data enters through its face interpolant, so compare against that
    const DofLayout layout(mp);
    for (const auto& bf : mp.boundary()) {
        if (bf.type != BoundaryType::Dirichlet) continue;
        const Patch& patch = mp.patch(bf.patch);
        const Index n = patch.num_basis();
        const IndexList dofs = face_dofs(patch, bf.face);
        Matrix g = Matrix::Zero(static_cast<Index>(dofs.size()), d);
        if (dirichlet) {
            std::vector<SplineBasis> tb;
            for (int t : face_tangents(d, bf.face)) tb.push_back(patch.basis(t));
            g = interpolate_coefficients(
                tb, [&](const Vector& s) { return dirichlet(patch.map_point(face_point(d, bf.face, s))); }, d);
        }
        Vector diff = Vector::Zero(layout.total);
        auto seg = layout.segment(diff, bf.patch);
        const auto uk = layout.segment(u, bf.patch);
        for (std::size_t a = 0; a < dofs.size(); ++a)
            for (int c = 0; c < d; ++c)
                seg[c * n + dofs[a]] = uk[c * n + dofs[a]] - g(static_cast<Index>(a), c);
        for (Index q = 0; q < count; ++q) {
            const Vector s = sample_face_coordinates(d, samples, q);
            const Vector v = evaluate_field(mp, diff, bf.patch, face_point(d, bf.face, s));
            out.dirichlet_trace = std::max(out.dirichlet_trace, v.lpNorm<Eigen::Infinity>());
        }
    }
    return out;
}

void discretize(const Problem& problem, Discretization& out) {
    const MultiPatch& mp = problem.domain;
    out.problem = &problem;
    out.patches.clear();
    out.stiffness.clear();
    const DofLayout layout(mp);
    out.f = Vector::Zero(layout.total);
    const LoadData load = problem.exact.load();
    for (Index k = 0; k < mp.num_patches(); ++k) {
        const Patch& patch = mp.patch(k);
        PatchSystem ps;
        ps.A = assemble_stiffness(patch, problem.coeffs);
        ps.M = assemble_mass(patch);
        ps.H = patch_diameter(patch);
        out.stiffness.push_back(ps.A);
        out.patches.push_back(std::move(ps));
        layout.segment(out.f, k) = assemble_load(patch, load, neumann_faces(mp, k));
    }
    out.constraints = std::make_unique<ConstraintSystem>(mp, out.stiffness, problem.exact.u);
}

IetiResult solve_ieti(const Discretization& disc, Variant variant, double tol, int max_iter) {
    const Problem& pr = *disc.problem;
    const ConstraintSystem& cs = *disc.constraints;
    const IetiSolver solver(pr.domain, pr.coeffs, disc.patches, cs, variant);
    if (max_iter <= 0) max_iter = static_cast<int>(10 * cs.num_constraints() + 100);
    const Vector lambda0 = cs.initial_multiplier(disc.f);
    const Vector rhs = solver.saddle_rhs(disc.f, lambda0);
    IetiResult res;
    const Vector x = minres([&](const Vector& v) { return solver.apply_saddle(v); },
                            [&](const Vector& v) { return solver.apply_preconditioner(v); }, rhs, tol, max_iter,
                            res.report);
    const Index np = solver.primal_size();
    cs.recover_solution(x.head(np), x.tail(solver.dual_size()), lambda0, res.u, res.lambda);
    return res;
}

Vector solve_direct(const Discretization& disc) {
    const Problem& pr = *disc.problem;
    return monolithic_solve(pr.domain, disc.stiffness, disc.f, pr.exact.u);
}

void RunConfig::validate() const {
    if (domain_file.empty()) {
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), preset) == names.end())
            throw ArgumentError("unknown preset '" + preset + "'");
    }
    if (!(tol > 0.0 && tol < 1.0)) throw ArgumentError("tolerance must lie in (0, 1)");
    if (max_iter < 0) throw ArgumentError("max_iter must be non-negative");
    coeffs.validate();
}

Problem build_problem(const RunConfig& config) {
    config.validate();
    if (!config.domain_file.empty()) {
        Problem pr = problem_from_domain(config.domain_file, load_multipatch(config.domain_file), config.coeffs);
        const Patch& p0 = pr.domain.patch(0);
        pr.options.degree = p0.basis(0).degree();
        pr.options.elements = static_cast<int>(p0.basis(0).num_elements());
        pr.options.patches = static_cast<int>(pr.domain.num_patches());
        return pr;
    }
    return make_preset(config.preset, config.options, config.coeffs);
}

namespace {

ExperimentRow solve_row(const Discretization& disc, const RunConfig& config, const Variant& variant) {
    const Problem& pr = *disc.problem;
    ExperimentRow row;
    row.preset = config.domain_file.empty() ? config.preset : config.domain_file;
    row.p = pr.options.degree;
    row.n_el = pr.options.elements;
    row.n_patch = static_cast<int>(pr.domain.num_patches());
    row.variant = variant.name();
    const IetiResult res = solve_ieti(disc, variant, config.tol, config.max_iter);
    row.iters = res.report.iterations;
    row.relres = res.report.true_residual;
    const ErrorNorms e = error_norms(pr.domain, res.u, pr.exact.u, pr.exact.grad);
    row.l2_err = e.l2;
    row.h1_err = e.h1;
    row.seconds = res.report.seconds;
    row.converged = res.report.converged;
    return row;
}

}  // namespace

ExperimentRow run_experiment(const RunConfig& config) {
    const Problem pr = build_problem(config);
    Discretization disc;
    discretize(pr, disc);
    return solve_row(disc, config, config.variant);
}

std::vector<ExperimentRow> run_sweep(const SweepConfig& config) {
    const RunConfig& base = config.base;
    const std::vector<int> degrees = config.degrees.empty() ? std::vector<int>{base.options.degree} : config.degrees;
    const std::vector<int> elements = config.elements.empty() ? std::vector<int>{base.options.elements} : config.elements;
    std::vector<int> patches = config.patches.empty() ? std::vector<int>{base.options.patches} : config.patches;
    if (base.preset != "cube-scal" || !base.domain_file.empty()) patches = {base.options.patches};
    const std::vector<Variant> variants = config.variants.empty() ? std::vector<Variant>{base.variant} : config.variants;
    std::vector<ExperimentRow> rows;
    for (int p : degrees)
        for (int e : elements)
            for (int np : patches) {
                RunConfig rc = base;
                rc.options.degree = p;
                rc.options.elements = e;
                rc.options.patches = np;
                const Problem pr = build_problem(rc);
                Discretization disc;
                discretize(pr, disc);
                for (const auto& v : variants) rows.push_back(solve_row(disc, rc, v));
            }
    return rows;
}

void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    os << kCsvHeader << '\n';
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%s,%d,%.10e,%.10e,%.10e,%.6f\n", r.preset.c_str(), r.p, r.n_el,
                      r.n_patch, r.variant.c_str(), r.iters, r.relres, r.l2_err, r.h1_err, r.seconds);
        os << buf;
    }
}

std::vector<ExperimentRow> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw ParseError("CSV header mismatch");
    std::vector<ExperimentRow> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 10) throw ParseError("line " + std::to_string(lineno) + ": expected 10 fields");
        try {
            ExperimentRow r;
            r.preset = f[0];
            r.p = std::stoi(f[1]);
            r.n_el = std::stoi(f[2]);
            r.n_patch = std::stoi(f[3]);
            r.variant = f[4];
            r.iters = std::stoi(f[5]);
            r.relres = std::stod(f[6]);
            r.l2_err = std::stod(f[7]);
            r.h1_err = std::stod(f[8]);
            r.seconds = std::stod(f[9]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw ParseError("line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

}  // namespace afieti

#include "afieti/config.hpp"
#include "afieti/error.hpp"
#include "afieti/experiment.hpp"
#include "afieti/geometry_io.hpp"
#include "afieti/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace afieti;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> preset, domain, variant, csv;
    std::optional<double> tol, lambda, mu;
    std::optional<int> max_iter;
    std::optional<unsigned> seed;
    std::vector<int> degree, elements, patches;
    std::vector<std::string> variants;
};

void add_common(CLI::App* cmd, Flags& f, bool lists) {
    cmd->add_option("--config", f.config, "config file (key = value with [section] headers)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", f.preset, "domain preset");
    cmd->add_option("--domain", f.domain, "multipatch file replacing the preset")->check(CLI::ExistingFile);
    cmd->add_option("--variant", f.variant, "exact-nr|inexact-nr|geo-nr|exact-s|inexact-s|geo-s");
    cmd->add_option("--tol", f.tol, "MINRES tolerance on the preconditioned residual");
    cmd->add_option("--max-iter", f.max_iter, "MINRES iteration cap (0: 10 * constraints + 100)");
    cmd->add_option("--csv", f.csv, "CSV output path");
    cmd->add_option("--seed", f.seed, "seed for random probes");
    cmd->add_option("--lambda", f.lambda, "Lame parameter lambda");
    cmd->add_option("--mu", f.mu, "Lame parameter mu");
    if (lists) {
        cmd->add_option("-p,--degree", f.degree, "spline degrees")->delimiter(',');
        cmd->add_option("--elements", f.elements, "elements per direction on the coarsest patch")->delimiter(',');
        cmd->add_option("--patches", f.patches, "patches per direction (cube preset)")->delimiter(',');
        cmd->add_option("--variants", f.variants, "variant list")->delimiter(',');
    } else {
        cmd->add_option("-p,--degree", f.degree, "spline degree")->expected(1);
        cmd->add_option("--elements", f.elements, "elements per direction on the coarsest patch")->expected(1);
        cmd->add_option("--patches", f.patches, "patches per direction (cube preset)")->expected(1);
    }
}

SweepConfig resolve(const Flags& f) {
    SweepConfig cfg = f.config.empty() ? SweepConfig{} : load_config(f.config);
    RunConfig& run = cfg.base;
    if (f.preset) {
        run.preset = *f.preset;
        run.domain_file.clear();
    }
    if (f.domain) run.domain_file = *f.domain;
    if (f.variant) run.variant = Variant::parse(*f.variant);
    if (f.tol) run.tol = *f.tol;
    if (f.max_iter) run.max_iter = *f.max_iter;
    if (f.csv) run.csv = *f.csv;
    if (f.seed) run.seed = *f.seed;
    if (f.lambda) run.coeffs.lambda = *f.lambda;
    if (f.mu) run.coeffs.mu = *f.mu;
    if (!f.degree.empty()) cfg.degrees = f.degree;
    if (!f.elements.empty()) cfg.elements = f.elements;
    if (!f.patches.empty()) cfg.patches = f.patches;
    if (!f.variants.empty()) {
        cfg.variants.clear();
        for (const auto& v : f.variants) cfg.variants.push_back(Variant::parse(v));
    }
    if (!cfg.degrees.empty()) run.options.degree = cfg.degrees.front();
    if (!cfg.elements.empty()) run.options.elements = cfg.elements.front();
    if (!cfg.patches.empty()) run.options.patches = cfg.patches.front();
    run.validate();
    return cfg;
}

int emit(const std::vector<ExperimentRow>& rows, const std::string& csv) {
    write_csv(std::cout, rows);
    if (!csv.empty()) {
        std::ofstream out(csv);
        if (!out) throw ArgumentError("cannot write CSV file '" + csv + "'");
        write_csv(out, rows);
    }
    int code = 0;
    for (const auto& r : rows)
        if (!r.converged) {
            std::cerr << "not converged: " << r.preset << " p=" << r.p << " n_el=" << r.n_el << " " << r.variant
                      << " after " << r.iters << " iterations\n";
            code = 2;
        }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AF-IETI solver for multipatch isogeometric linear elasticity"};
    app.require_subcommand(1);
    Flags solve_flags, sweep_flags, verify_flags;
    CLI::App* solve = app.add_subcommand("solve", "run one configuration");
    CLI::App* sweep = app.add_subcommand("sweep", "run a grid of degrees, element counts, patch counts and variants");
    CLI::App* verify = app.add_subcommand("verify", "run invariant checks and oracle comparisons");
    add_common(solve, solve_flags, false);
    add_common(sweep, sweep_flags, true);
    add_common(verify, verify_flags, false);
    Flags export_flags;
    std::string export_path;
    CLI::App* exporter = app.add_subcommand("export", "write the multipatch file of a preset");
    add_common(exporter, export_flags, false);
    exporter->add_option("--out", export_path, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) {
            const SweepConfig cfg = resolve(solve_flags);
            return emit({run_experiment(cfg.base)}, cfg.base.csv);
        }
        if (sweep->parsed()) {
            const SweepConfig cfg = resolve(sweep_flags);
            return emit(run_sweep(cfg), cfg.base.csv);
        }
        if (exporter->parsed()) {
            const SweepConfig cfg = resolve(export_flags);
            save_multipatch(build_problem(cfg.base).domain, export_path);
            return 0;
        }
        const SweepConfig cfg = resolve(verify_flags);
        const Problem pr = build_problem(cfg.base);
        bool ok = true;
        for (const auto& c : run_verification(pr, cfg.base.variant, cfg.base.seed)) {
            std::printf("%s  %-40s %.3e (limit %.1e)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit);
            ok = ok && c.pass;
        }
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

#include <doctest.h>

#include "afieti/config.hpp"
#include "afieti/error.hpp"
#include "afieti/experiment.hpp"
#include "afieti/geometry_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace afieti;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SweepConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

// -div sigma by central differences of the closed-form stress
Vector numeric_body(const Manufactured& m, const Vector& x) {
    const int d = m.dim;
    const double h = 1e-4;
    Vector f = Vector::Zero(d);
    for (int j = 0; j < d; ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        f -= (m.stress(xp).col(j) - m.stress(xm).col(j)) / (2 * h);
    }
    return f;
}

}  // namespace

TEST_CASE("preset structure") {
    const Problem para = make_preset("parallelepiped-nc", {1, 2, 1});
    CHECK(para.domain.num_patches() == 3);
    CHECK(para.domain.interfaces().size() == 2);
    for (const auto& i : para.domain.interfaces()) CHECK(i.nesting == Nesting::Nested);
    CHECK(para.domain.patch(2).basis(0).num_elements() == 8);

    for (int N : {2, 3}) {
        const Problem cube = make_preset("cube-scal", {2, 2, N});
        CHECK(cube.domain.num_patches() == N * N * N);
        CHECK(static_cast<int>(cube.domain.interfaces().size()) == 3 * N * N * (N - 1));
        int neumann = 0;
        for (const auto& b : cube.domain.boundary()) neumann += b.type == BoundaryType::Neumann;
        CHECK(neumann == 2 * N * N);
    }

    const Problem sq = make_preset("square-2patch", {2, 4, 1});
    const InterfaceCoupling cp = match_interface_dofs(sq.domain, sq.domain.interfaces().front());
    CHECK(cp.slave_dofs.size() == 4 + 2);
    CHECK_THROWS_AS(make_preset("no-such-domain", {}), ArgumentError);
    CHECK_THROWS_AS(make_preset("square-2patch", {0, 4, 1}), ArgumentError);
}

TEST_CASE("preset sample files are reproduced bit for bit") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const std::string path = std::string(AFIETI_SOURCE_DIR) + "/data/presets/" + name + ".mp";
        const std::string text = multipatch_to_string(make_preset(name, {2, 2, 2}).domain);
        CHECK(read_file(path) == text);
        const MultiPatch mp = load_multipatch(path);
        CHECK_NOTHROW(mp.validate());
        CHECK(multipatch_to_string(mp) == text);
    }
}

TEST_CASE("manufactured body forces agree with the divergence of the stress") {
    const ElasticityCoefficients c;
    for (int d : {2, 3}) {
        const Manufactured m = manufactured_solution(d, c);
        for (int t = 0; t < 10; ++t) {
            Vector x(d);
            for (int j = 0; j < d; ++j) x[j] = 0.1 + 0.27 * t + 0.13 * j;
            CHECK((m.body(x) - numeric_body(m, x)).norm() <= 1e-6 * (1 + m.body(x).norm()));
            // gradient by central differences of u
            Matrix G(d, d);
            for (int j = 0; j < d; ++j) {
                Vector xp = x, xm = x;
                xp[j] += 1e-5;
                xm[j] -= 1e-5;
                G.col(j) = (m.u(xp) - m.u(xm)) / 2e-5;
            }
            CHECK((m.grad(x) - G).norm() <= 1e-8 * (1 + G.norm()));
        }
    }
    CHECK_THROWS_AS(manufactured_solution(4, c), ArgumentError);
}

TEST_CASE("error norms") {
    const Problem pr = make_preset("square-2patch", {2, 3, 1});
    const DofLayout lay(pr.domain);
    CHECK(error_norms(pr.domain, Vector::Zero(lay.total), [](const Vector&) { return Vector(Vector::Zero(2)); },
                      [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); })
              .l2 == 0.0);
    // quadratic field reproduced exactly by p = 2 interpolation on affine patches
    auto u = [](const Vector& x) { return Vector{{x[0] * x[0] - x[1], 2 * x[0] * x[1] + 1}}; };
    auto gu = [](const Vector& x) {
        Matrix G(2, 2);
        G << 2 * x[0], -1.0, 2 * x[1], 2 * x[0];
        return G;
    };
    Vector coeffs(lay.total);
    for (Index k = 0; k < 2; ++k) {
        const Patch& patch = pr.domain.patch(k);
        const Matrix c = interpolate_coefficients(patch.bases(), [&](const Vector& eta) { return u(patch.map_point(eta)); }, 2);
        const Index n = patch.num_basis();
        lay.segment(coeffs, k) << c.col(0), c.col(1);
        CHECK(n == c.rows());
    }
    const ErrorNorms e = error_norms(pr.domain, coeffs, u, gu);
    CHECK(e.l2 <= 1e-10);
    CHECK(e.h1 <= 1e-10);
}

TEST_CASE("AF-IETI agrees with the monolithic oracle and satisfies the constraints") {
    const std::vector<std::pair<std::string, PresetOptions>> cases{
        {"single-patch", {2, 3, 1}},      {"square-2patch", {2, 3, 1}}, {"square-2patch-nc", {2, 3, 1}},
        {"distorted-2patch", {3, 3, 1}}, {"cube-scal", {1, 2, 2}},     {"parallelepiped-nc", {1, 1, 1}}};
    for (const auto& [name, opt] : cases) {
        CAPTURE(name);
        const Problem pr = make_preset(name, opt);
        Discretization disc;
        discretize(pr, disc);
        const Vector ref = solve_direct(disc);
        for (const char* v : {"exact-nr", "inexact-s"}) {
            const IetiResult res = solve_ieti(disc, Variant::parse(v), 1e-8);
            CHECK(res.report.converged);
            CHECK((res.u - ref).norm() <= 1e-6 * ref.norm());
            const ConstraintViolation cv = constraint_violation(pr.domain, res.u, pr.exact.u);
            CHECK(cv.interface_jump <= 1e-7);
            // nested faces meeting a Dirichlet edge inherit the coarse trace there
            if (name != "parallelepiped-nc") CHECK(cv.dirichlet_trace <= 1e-7);
        }
    }
}

TEST_CASE("Dirichlet trace on nested 3D edges converges at rate p + 1") {
    double prev = 0.0;
    for (int e : {1, 2, 4}) {
        const Problem pr = make_preset("parallelepiped-nc", {1, e, 1});
        Discretization disc;
        discretize(pr, disc);
        const double t = constraint_violation(pr.domain, solve_direct(disc), pr.exact.u).dirichlet_trace;
        if (prev > 0.0) CHECK(std::log2(prev / t) >= 1.5);
        prev = t;
    }
}

TEST_CASE("config parsing") {
    const SweepConfig cfg = parse(R"(
# comment
[problem]
preset = cube-scal
p = 3
n_el = 5
lambda = 1.5
mu = 0.5
[solver]
variant = geo-s
tol = 1e-6
max_iter = 40
[output]
csv = out.csv
seed = 7
[sweep]
n_patch = 2, 3
variants = exact-nr, inexact-nr
)");
    CHECK(cfg.base.preset == "cube-scal");
    CHECK(cfg.base.options.degree == 3);
    CHECK(cfg.base.options.elements == 5);
    CHECK(cfg.base.coeffs.lambda == 1.5);
    CHECK(cfg.base.variant == Variant::parse("geo-s"));
    CHECK(cfg.base.tol == 1e-6);
    CHECK(cfg.base.max_iter == 40);
    CHECK(cfg.base.csv == "out.csv");
    CHECK(cfg.base.seed == 7);
    CHECK(cfg.patches == std::vector<int>{2, 3});
    CHECK(cfg.variants.size() == 2);

    CHECK_THROWS_AS(parse("[problem]\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse("[extras]\n"), ConfigError);
    CHECK_THROWS_AS(parse("p = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[problem]\np = two\n"), ConfigError);
    CHECK_THROWS_AS(parse("[problem]\np = 2\np = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[solver]\nvariant = fastest\n"), ConfigError);
    CHECK_THROWS_AS(parse("[problem]\npreset = moon\n"), ConfigError);
    CHECK_THROWS_AS(parse("[solver]\ntol = 2\n"), ConfigError);
    try {
        parse("[problem]\n\nbogus = 1\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("shipped configs parse") {
    for (const char* f : {"square", "parallelepiped_degrees", "cube_scaling", "distorted_geometry"}) {
        CAPTURE(f);
        CHECK_NOTHROW(load_config(std::string(AFIETI_SOURCE_DIR) + "/configs/" + f + ".ini"));
    }
}

TEST_CASE("sweep rows, CSV round trip and determinism") {
    SweepConfig cfg;
    cfg.base.preset = "square-2patch-nc";
    cfg.base.options.elements = 2;
    cfg.degrees = {1, 2};
    cfg.variants = {Variant::parse("exact-nr"), Variant::parse("inexact-nr")};
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].p == 1);
    CHECK(rows[1].variant == "inexact-nr");
    CHECK(rows[3].n_patch == 2);
    for (const auto& r : rows) CHECK(r.converged);

    std::stringstream a;
    write_csv(a, rows);
    const auto back = read_csv(a);
    REQUIRE(back.size() == rows.size());
    std::stringstream a2;
    write_csv(a2, back);
    CHECK(a2.str() == a.str());
    CHECK(a.str().rfind(std::string(kCsvHeader) + "\n", 0) == 0);

    auto strip_seconds = [](std::vector<ExperimentRow> rs) {
        for (auto& r : rs) r.seconds = 0.0;
        std::stringstream s;
        write_csv(s, rs);
        return s.str();
    };
    CHECK(strip_seconds(run_sweep(cfg)) == strip_seconds(rows));

    std::stringstream bad("preset,p\n");
    CHECK_THROWS_AS(read_csv(bad), ParseError);
}

TEST_CASE("file-backed runs use the file's discretization") {
    RunConfig rc;
    rc.domain_file = std::string(AFIETI_SOURCE_DIR) + "/data/presets/square-2patch-nc.mp";
    const ExperimentRow row = run_experiment(rc);
    CHECK(row.converged);
    CHECK(row.p == 2);
    CHECK(row.n_el == 2);
    CHECK(row.n_patch == 2);
    rc.domain_file = "/nonexistent.mp";
    CHECK_THROWS_AS(run_experiment(rc), ParseError);
}

#include "afieti/geometry_io.hpp"

#include "afieti/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace afieti {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* type_name(BoundaryType t) { return t == BoundaryType::Dirichlet ? "dirichlet" : "neumann"; }

/// Token stream over non-comment lines that remembers line numbers for messages.
class Tokens {
public:
    explicit Tokens(std::istream& in) {
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) items_.push_back({tok, number});
        }
    }

    bool done() const { return pos_ >= items_.size(); }

    std::string word() {
        if (done()) throw ParseError("unexpected end of multipatch file");
        return items_[pos_++].text;
    }

    void expect(const std::string& w) {
        const int line = current_line();
        const std::string got = word();
        if (got != w) fail(line, "expected '" + w + "', found '" + got + "'");
    }

    long integer() {
        const int line = current_line();
        const std::string t = word();
        long v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) fail(line, "expected an integer, found '" + t + "'");
        return v;
    }

    double real() {
        const int line = current_line();
        const std::string t = word();
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) fail(line, "expected a number, found '" + t + "'");
            return v;
        } catch (const std::logic_error&) {
            fail(line, "expected a number, found '" + t + "'");
        }
        return 0.0;
    }

    int current_line() const { return done() ? (items_.empty() ? 0 : items_.back().line) : items_[pos_].line; }

    [[noreturn]] static void fail(int line, const std::string& msg) {
        throw ParseError("line " + std::to_string(line) + ": " + msg);
    }

private:
    struct Item {
        std::string text;
        int line;
    };
    std::vector<Item> items_;
    std::size_t pos_ = 0;
};

}  // namespace

void write_multipatch(const MultiPatch& mp, std::ostream& out) {
    out << "afieti-multipatch 1\n";
    out << "dim " << mp.dim() << "\n";
    out << "patches " << mp.num_patches() << "\n";
    for (Index k = 0; k < mp.num_patches(); ++k) {
        const Patch& p = mp.patch(k);
        out << "patch " << k << "\n";
        for (int l = 0; l < p.dim(); ++l) {
            const auto& kv = p.basis(l).knots();
            out << "knots " << l << " degree " << kv.degree() << " count " << kv.knots().size() << "\n";
            for (std::size_t i = 0; i < kv.knots().size(); ++i) out << (i ? " " : "") << fmt(kv.knots()[i]);
            out << "\n";
        }
        out << "control " << p.control().rows() << "\n";
        for (Index i = 0; i < p.control().rows(); ++i) {
            for (Index c = 0; c < p.control().cols(); ++c) out << (c ? " " : "") << fmt(p.control()(i, c));
            out << "\n";
        }
    }
    out << "interfaces " << mp.interfaces().size() << "\n";
    for (const auto& i : mp.interfaces()) {
        out << "interface " << i.patch_a << " " << i.face_a << " " << i.patch_b << " " << i.face_b << " perm";
        for (int v : i.orientation.perm) out << " " << v;
        out << " flip";
        for (bool f : i.orientation.flip) out << " " << (f ? 1 : 0);
        out << " " << (i.nesting == Nesting::Conforming ? "conforming" : "nested") << "\n";
    }
    out << "boundary " << mp.boundary().size() << "\n";
    for (const auto& b : mp.boundary()) out << "face " << b.patch << " " << b.face << " " << type_name(b.type) << "\n";
}

std::string multipatch_to_string(const MultiPatch& mp) {
    std::ostringstream os;
    write_multipatch(mp, os);
    return os.str();
}

MultiPatch read_multipatch(std::istream& in) {
    Tokens tk(in);
    tk.expect("afieti-multipatch");
    const int version_line = tk.current_line();
    if (tk.integer() != 1) Tokens::fail(version_line, "unsupported format version");
    tk.expect("dim");
    const int dim_line = tk.current_line();
    const int dim = static_cast<int>(tk.integer());
    if (dim != 2 && dim != 3) Tokens::fail(dim_line, "dimension must be 2 or 3");
    MultiPatch mp(dim);
    tk.expect("patches");
    const long np = tk.integer();
    for (long k = 0; k < np; ++k) {
        tk.expect("patch");
        const int idx_line = tk.current_line();
        if (tk.integer() != k) Tokens::fail(idx_line, "patches must be listed in order");
        std::vector<SplineBasis> bases;
        for (int l = 0; l < dim; ++l) {
            tk.expect("knots");
            const int line = tk.current_line();
            if (tk.integer() != l) Tokens::fail(line, "knot vectors must be listed by direction");
            tk.expect("degree");
            const int degree = static_cast<int>(tk.integer());
            tk.expect("count");
            const long count = tk.integer();
            if (count < 0 || count > 1000000) Tokens::fail(line, "bad knot count");
            std::vector<double> knots(static_cast<std::size_t>(count));
            for (auto& v : knots) v = tk.real();
            try {
                bases.emplace_back(KnotVector(std::move(knots), degree));
            } catch (const Error& e) {
                Tokens::fail(line, e.what());
            }
        }
        tk.expect("control");
        const int cline = tk.current_line();
        const long rows = tk.integer();
        Index expected = 1;
        for (const auto& b : bases) expected *= b.size();
        if (rows != expected) Tokens::fail(cline, "control point count does not match the knot vectors");
        Matrix control(rows, dim);
        for (long i = 0; i < rows; ++i)
            for (int c = 0; c < dim; ++c) control(i, c) = tk.real();
        mp.add_patch(Patch(std::move(bases), std::move(control)));
    }
    tk.expect("interfaces");
    const long ni = tk.integer();
    for (long k = 0; k < ni; ++k) {
        tk.expect("interface");
        const int line = tk.current_line();
        Interface i;
        i.patch_a = static_cast<int>(tk.integer());
        i.face_a = static_cast<int>(tk.integer());
        i.patch_b = static_cast<int>(tk.integer());
        i.face_b = static_cast<int>(tk.integer());
        tk.expect("perm");
        for (int t = 0; t < dim - 1; ++t) i.orientation.perm.push_back(static_cast<int>(tk.integer()));
        tk.expect("flip");
        for (int t = 0; t < dim - 1; ++t) i.orientation.flip.push_back(tk.integer() != 0);
        const std::string kind = tk.word();
        if (kind == "conforming") {
            i.nesting = Nesting::Conforming;
        } else if (kind == "nested") {
            i.nesting = Nesting::Nested;
        } else {
            Tokens::fail(line, "interface kind must be 'conforming' or 'nested'");
        }
        try {
            mp.add_interface(std::move(i));
        } catch (const Error& e) {
            Tokens::fail(line, e.what());
        }
    }
    tk.expect("boundary");
    const long nb = tk.integer();
    for (long k = 0; k < nb; ++k) {
        tk.expect("face");
        const int line = tk.current_line();
        const int patch = static_cast<int>(tk.integer());
        const int face = static_cast<int>(tk.integer());
        const std::string type = tk.word();
        BoundaryType bt = BoundaryType::Dirichlet;
        if (type == "neumann") {
            bt = BoundaryType::Neumann;
        } else if (type != "dirichlet") {
            Tokens::fail(line, "boundary type must be 'dirichlet' or 'neumann'");
        }
        try {
            mp.set_boundary(patch, face, bt);
        } catch (const Error& e) {
            Tokens::fail(line, e.what());
        }
    }
    if (!tk.done()) Tokens::fail(tk.current_line(), "trailing content after boundary section");
    return mp;
}

MultiPatch load_multipatch(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open multipatch file '" + path + "'");
    return read_multipatch(in);
}

void save_multipatch(const MultiPatch& mp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write multipatch file '" + path + "'");
    write_multipatch(mp, out);
}

}  // namespace afieti

#include "afieti/config.hpp"

#include "afieti/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace afieti {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    int x = 0;
    try {
        x = std::stoi(v, &pos);
    } catch (const std::logic_error&) {
        throw ConfigError(where + ": expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(where + ": expected an integer, got '" + v + "'");
    return x;
}

double to_double(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::logic_error&) {
        throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(where + ": expected a number, got '" + v + "'");
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> int_list(const std::string& v, const std::string& where) {
    std::vector<int> out;
    for (const auto& s : split_list(v)) out.push_back(to_int(s, where));
    if (out.empty()) throw ConfigError(where + ": empty list");
    return out;
}

}  // namespace

SweepConfig parse_config(std::istream& is) {
    SweepConfig cfg;
    RunConfig& run = cfg.base;
    std::string section;
    std::set<std::string> seen;
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        const std::string where = "config line " + std::to_string(lineno);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "problem" && section != "solver" && section != "output" && section != "sweep")
                throw ConfigError(where + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside a section");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        if (!seen.insert(section + "." + key).second) throw ConfigError(where + ": repeated key '" + key + "'");
        auto unknown = [&] { return ConfigError(where + ": unknown key '" + key + "' in [" + section + "]"); };
        try {
            if (section == "problem") {
                if (key == "preset") run.preset = value;
                else if (key == "domain_file") run.domain_file = value;
                else if (key == "p") run.options.degree = to_int(value, where);
                else if (key == "n_el") run.options.elements = to_int(value, where);
                else if (key == "n_patch") run.options.patches = to_int(value, where);
                else if (key == "lambda") run.coeffs.lambda = to_double(value, where);
                else if (key == "mu") run.coeffs.mu = to_double(value, where);
                else throw unknown();
            } else if (section == "solver") {
                if (key == "variant") run.variant = Variant::parse(value);
                else if (key == "tol") run.tol = to_double(value, where);
                else if (key == "max_iter") run.max_iter = to_int(value, where);
                else throw unknown();
            } else if (section == "output") {
                if (key == "csv") run.csv = value;
                else if (key == "seed") run.seed = static_cast<unsigned>(to_int(value, where));
                else throw unknown();
            } else {
                if (key == "p") cfg.degrees = int_list(value, where);
                else if (key == "n_el") cfg.elements = int_list(value, where);
                else if (key == "n_patch") cfg.patches = int_list(value, where);
                else if (key == "variants") {
                    cfg.variants.clear();
                    for (const auto& v : split_list(value)) cfg.variants.push_back(Variant::parse(v));
                    if (cfg.variants.empty()) throw ConfigError(where + ": empty list");
                } else throw unknown();
            }
        } catch (const ArgumentError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    try {
        run.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace afieti

#pragma once

#include "ugks/boundary.hpp"
#include "ugks/error.hpp"
#include "ugks/harness/expression.hpp"
#include "ugks/quadrature.hpp"
#include "ugks/reference.hpp"
#include "ugks/stepper.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ugks::harness {

enum class SchemeKind { ugks, ugks_id, upwind, diffusion };

inline std::string to_string(SchemeKind s) {
    switch (s) {
        case SchemeKind::ugks: return "ugks";
        case SchemeKind::ugks_id: return "ugks_id";
        case SchemeKind::upwind: return "upwind";
        case SchemeKind::diffusion: return "diffusion";
    }
    return "?";
}

/// One experiment: problem data, output times, resolutions and numerics.
/// Inflow expressions are functions of v, sigma/alpha/source of x, the
/// initial condition of x and v, the kernel of v and vp.
struct ExperimentSpec {
    std::string id = "custom";
    double x_min = 0.0;
    double x_max = 1.0;
    double eps = 1.0;
    Expression sigma{1.0};
    Expression alpha{0.0};
    Expression source{0.0};
    Expression f_left{0.0};
    Expression f_right{0.0};
    Expression initial{0.0};
    std::vector<double> times{0.1};
    std::vector<std::size_t> cells{25};

    SchemeKind scheme = SchemeKind::ugks;
    BoundaryMode bc = BoundaryMode::stabilized;
    WeightVariant weight = WeightVariant::polynomial;
    int order = 1;
    double mc_theta = 1.5;
    QuadratureFamily quadrature = QuadratureFamily::double_gauss;
    std::size_t nodes = 16;
    double cfl = 0.9;
    CflForm cfl_form = CflForm::max_form;
    DiffusionScheme diffusion_time = DiffusionScheme::explicit_euler;

    std::optional<Expression> kernel;
    std::string kernel_file;
    bool allow_unstable = false;

    std::size_t reference_cells = 0;
    SchemeKind reference_scheme = SchemeKind::upwind;

    bool penalized() const { return kernel.has_value() || !kernel_file.empty(); }

    void validate() const {
        auto bad = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
        if (!(x_max > x_min)) bad("domain", "need x_min < x_max");
        if (!(eps > 0.0)) bad("eps", "must be positive");
        if (times.empty()) bad("times", "at least one output time is required");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] >= 0.0)) bad("times", "must be nonnegative");
            if (i > 0 && !(times[i] > times[i - 1])) bad("times", "must be strictly increasing");
        }
        if (cells.empty()) bad("cells", "at least one cell count is required");
        for (auto c : cells)
            if (c < 2) bad("cells", "need at least 2 cells");
        if (order != 1 && order != 2) bad("order", "must be 1 or 2");
        if (order == 2 && !(mc_theta >= 1.0 && mc_theta <= 2.0)) bad("mc_theta", "must lie in [1, 2]");
        if (nodes < 2 || nodes > 512 || nodes % 2) bad("nodes", "must be even and in [2, 512]");
        if (!(cfl > 0.0 && cfl <= 1.0)) bad("cfl", "must lie in (0, 1]");
        if (kernel && !kernel_file.empty()) bad("kernel", "give either kernel or kernel_file, not both");
        if (penalized() && scheme != SchemeKind::ugks && scheme != SchemeKind::ugks_id)
            bad("kernel", "a general kernel needs scheme ugks or ugks_id");
        if (f_left.uses_x() || f_right.uses_x()) bad("f_left/f_right", "inflow depends on v only");
        if (sigma.uses_v() || alpha.uses_v() || source.uses_v()) bad("sigma/alpha/source", "depend on x only");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& text, const std::string& key, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    // allow constant expressions such as 1e-2 or 0.9*0.5
    try {
        const Expression e = Expression::parse(text, line);
        if (e.uses_x() || e.uses_v() || e.uses_vp()) throw ConfigError(key + ": expected a number", line);
        return e(0.0);
    } catch (const ConfigError&) {
        throw ConfigError(key + ": expected a number, got '" + text + "'", line);
    }
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::size_t parse_count(const std::string& text, const std::string& key, std::size_t line) {
    const double v = parse_number(text, key, line);
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ConfigError(key + ": expected a nonnegative integer, got '" + text + "'", line);
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& text, const std::string& key, std::size_t line) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw ConfigError(key + ": expected true or false", line);
}

inline SchemeKind parse_scheme(const std::string& text, std::size_t line = 0) {
    if (text == "ugks") return SchemeKind::ugks;
    if (text == "ugks_id") return SchemeKind::ugks_id;
    if (text == "upwind") return SchemeKind::upwind;
    if (text == "diffusion") return SchemeKind::diffusion;
    throw ConfigError("scheme: unknown value '" + text + "' (ugks, ugks_id, upwind, diffusion)", line);
}

inline BoundaryMode parse_bc(const std::string& text, std::size_t line = 0) {
    if (text == "stabilized") return BoundaryMode::stabilized;
    if (text == "corrected") return BoundaryMode::corrected;
    if (text == "blended") return BoundaryMode::blended;
    throw ConfigError("bc: unknown value '" + text + "' (stabilized, corrected, blended)", line);
}

}  // namespace detail

using detail::parse_bc;
using detail::parse_scheme;

/// Parameters of the seven built-in experiments. Every run starts from
/// f = 0 in the interior.
inline ExperimentSpec builtin_example(const std::string& id) {
    ExperimentSpec s;
    s.id = id;
    s.f_left = Expression(0.0);
    s.f_right = Expression(0.0);
    s.alpha = Expression(0.0);
    s.source = Expression(0.0);
    s.sigma = Expression(1.0);
    s.scheme = SchemeKind::ugks;
    if (id == "ex1") {
        s.f_right = Expression(1.0);
        s.eps = 1.0;
        s.times = {0.1, 0.4, 1.0, 1.6, 4.0};
        s.cells = {25, 200};
        s.reference_scheme = SchemeKind::upwind;
        s.reference_cells = 1000;
    } else if (id == "ex2") {
        s.f_left = Expression(1.0);
        s.eps = 1e-8;
        s.times = {0.01, 0.05, 0.15, 2.0};
        s.cells = {25, 200};
        s.reference_scheme = SchemeKind::diffusion;
        s.reference_cells = 2000;
    } else if (id == "ex3" || id == "ex4") {
        s.sigma = id == "ex3" ? Expression::parse("1 + (10*x)^2") : Expression::parse("piecewise(x, 1, 0.1, 10, 0.5, 100)");
        s.source = Expression(1.0);
        s.eps = 1e-2;
        s.times = {0.4};
        s.cells = {40, 200};
        s.reference_scheme = SchemeKind::upwind;
        s.reference_cells = 2000;
    } else if (id == "ex5" || id == "ex6") {
        s.f_left = Expression::parse("v");
        s.eps = id == "ex5" ? 1e-2 : 1e-4;
        s.times = {0.4};
        s.cells = {25, 200};
        s.bc = BoundaryMode::blended;
        s.reference_scheme = id == "ex5" ? SchemeKind::upwind : SchemeKind::diffusion;
        s.reference_cells = 2000;
    } else if (id == "ex7") {
        s.f_left = Expression::parse("v");
        s.sigma = Expression(0.0);
        s.eps = 1.0;
        s.times = {0.4};
        s.cells = {25, 200};
        s.bc = BoundaryMode::blended;
        s.nodes = 16;
        s.reference_scheme = SchemeKind::upwind;
        s.reference_cells = 1000;
    } else {
        throw ConfigError("unknown example '" + id + "' (ex1 .. ex7)");
    }
    return s;
}

inline std::vector<std::string> builtin_ids() { return {"ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "ex7"}; }

/// Flat `key = value` text; `#` starts a comment. An `example = exN` line
/// anywhere in the file selects the base experiment that the other keys
/// override. Relative kernel_file paths resolve against `base_dir`.
inline ExperimentSpec parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
    struct Entry {
        std::string key, value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    {
        std::stringstream ss(text);
        std::string raw;
        std::size_t line = 0;
        while (std::getline(ss, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string body = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
            Entry e{detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)), line};
            if (e.key.empty()) throw ConfigError("missing key", line);
            if (e.value.empty()) throw ConfigError(e.key + ": missing value", line);
            for (const auto& prev : entries)
                if (prev.key == e.key) throw ConfigError(e.key + ": duplicate key", line);
            entries.push_back(std::move(e));
        }
    }

    ExperimentSpec s;
    for (const auto& e : entries) {
        if (e.key != "example") continue;
        try {
            s = builtin_example(e.value);
        } catch (const ConfigError& err) {
            throw ConfigError(err.what(), e.line);
        }
    }

    for (const auto& e : entries) {
        const std::string& k = e.key;
        const std::string& v = e.value;
        const std::size_t ln = e.line;
        if (k == "example") continue;
        if (k == "id") s.id = v;
        else if (k == "domain") {
            const auto parts = detail::split_list(v);
            if (parts.size() != 2) throw ConfigError("domain: expected 'x_min, x_max'", ln);
            s.x_min = detail::parse_number(parts[0], k, ln);
            s.x_max = detail::parse_number(parts[1], k, ln);
        } else if (k == "eps") s.eps = detail::parse_number(v, k, ln);
        else if (k == "sigma") s.sigma = Expression::parse(v, ln);
        else if (k == "alpha") s.alpha = Expression::parse(v, ln);
        else if (k == "source") s.source = Expression::parse(v, ln);
        else if (k == "f_left") s.f_left = Expression::parse(v, ln);
        else if (k == "f_right") s.f_right = Expression::parse(v, ln);
        else if (k == "initial") s.initial = Expression::parse(v, ln);
        else if (k == "times") {
            s.times.clear();
            for (const auto& p : detail::split_list(v)) s.times.push_back(detail::parse_number(p, k, ln));
        } else if (k == "cells") {
            s.cells.clear();
            for (const auto& p : detail::split_list(v)) s.cells.push_back(detail::parse_count(p, k, ln));
        } else if (k == "scheme") s.scheme = detail::parse_scheme(v, ln);
        else if (k == "bc") s.bc = detail::parse_bc(v, ln);
        else if (k == "weight") {
            if (v == "polynomial") s.weight = WeightVariant::polynomial;
            else if (v == "fitted") s.weight = WeightVariant::fitted;
            else throw ConfigError("weight: expected polynomial or fitted", ln);
        } else if (k == "order") s.order = static_cast<int>(detail::parse_count(v, k, ln));
        else if (k == "mc_theta") s.mc_theta = detail::parse_number(v, k, ln);
        else if (k == "quadrature") {
            if (v == "double_gauss") s.quadrature = QuadratureFamily::double_gauss;
            else if (v == "gauss" || v == "gauss_legendre") s.quadrature = QuadratureFamily::gauss_legendre;
            else throw ConfigError("quadrature: expected double_gauss or gauss", ln);
        } else if (k == "nodes") s.nodes = detail::parse_count(v, k, ln);
        else if (k == "cfl") s.cfl = detail::parse_number(v, k, ln);
        else if (k == "cfl_form") {
            if (v == "max") s.cfl_form = CflForm::max_form;
            else if (v == "sum") s.cfl_form = CflForm::sum_form;
            else throw ConfigError("cfl_form: expected max or sum", ln);
        } else if (k == "diffusion_time") {
            if (v == "explicit") s.diffusion_time = DiffusionScheme::explicit_euler;
            else if (v == "implicit") s.diffusion_time = DiffusionScheme::implicit_euler;
            else throw ConfigError("diffusion_time: expected explicit or implicit", ln);
        } else if (k == "kernel") s.kernel = Expression::parse(v, ln);
        else if (k == "kernel_file") {
            std::filesystem::path p(v);
            s.kernel_file = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
        } else if (k == "allow_unstable") s.allow_unstable = detail::parse_bool(v, k, ln);
        else if (k == "reference_cells") s.reference_cells = detail::parse_count(v, k, ln);
        else if (k == "reference_scheme") s.reference_scheme = detail::parse_scheme(v, ln);
        else throw ConfigError("unknown key '" + k + "'", ln);
    }
    s.validate();
    return s;
}

inline ExperimentSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

/// Whitespace-separated n x n table of kernel values k(v_j, v_k) in node
/// order. Lines starting with '#' are skipped.
inline std::vector<double> read_kernel_table(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open kernel file '" + path.string() + "'");
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        std::stringstream ss(line);
        double x;
        while (ss >> x) out.push_back(x);
        if (!ss.eof()) throw ConfigError("kernel file '" + path.string() + "': non-numeric entry");
    }
    if (out.size() != n * n)
        throw ConfigError("kernel file '" + path.string() + "': expected " + std::to_string(n * n) + " values, got " +
                          std::to_string(out.size()));
    return out;
}

}  // namespace ugks::harness

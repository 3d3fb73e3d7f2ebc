#pragma once

#include "ugks/error.hpp"
#include "ugks/harness/config.hpp"
#include "ugks/mesh.hpp"
#include "ugks/penalized.hpp"
#include "ugks/quadrature.hpp"
#include "ugks/reference.hpp"
#include "ugks/state.hpp"
#include "ugks/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

namespace ugks::harness {

/// Density (and optionally f) at one output time.
struct Snapshot {
    double t = 0;
    std::vector<double> x;
    std::vector<double> rho;
    std::vector<double> f;  ///< row-major cells x nodes, empty unless kept
    std::size_t n_nodes = 0;
};

struct RunResult {
    std::string name;
    SchemeKind scheme = SchemeKind::ugks;
    std::size_t cells = 0;
    double x_min = 0;
    double x_max = 1;
    std::vector<double> nodes;  ///< velocity nodes, for the f columns
    std::vector<Snapshot> snapshots;
    double dt = 0;
    std::size_t steps = 0;
    double wall_seconds = 0;
};

struct RunOptions {
    /// Called after every accepted kinetic step (not for the diffusion scheme).
    std::function<void(const KineticState&, const VelocityQuadrature&)> on_step;
    bool keep_f = false;
    double dt_override = 0;  ///< used instead of the CFL policy when > 0
};

/// Problem objects of one resolution.
struct Discretization {
    SpatialMesh mesh;
    VelocityQuadrature q;
    MaterialField material;
    BoundarySpec bc;
    KineticState initial;
};

inline Discretization discretize(const ExperimentSpec& spec, std::size_t cells) {
    SpatialMesh mesh(spec.x_min, spec.x_max, cells);
    VelocityQuadrature q = build_quadrature(spec.quadrature, spec.nodes);
    MaterialField mat = sample_material([&](double x) { return spec.sigma(x); }, [&](double x) { return spec.alpha(x); },
                                        [&](double x) { return spec.source(x); }, mesh);
    BoundarySpec bc;
    bc.mode = spec.bc;
    bc.weight = spec.weight;
    bc.f_left.assign(q.size(), 0.0);
    bc.f_right.assign(q.size(), 0.0);
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double v = q.node(k);
        if (v > 0.0) bc.f_left[k] = spec.f_left(spec.x_min, v);
        if (v < 0.0) bc.f_right[k] = spec.f_right(spec.x_max, v);
    }
    KineticState s0 = make_state(mesh, q, [&](double x, double v) { return spec.initial(x, v); });
    return {mesh, q, std::move(mat), std::move(bc), std::move(s0)};
}

inline PenalizedOperator make_operator(const ExperimentSpec& spec, const VelocityQuadrature& q) {
    if (spec.kernel) {
        const Expression& k = *spec.kernel;
        return PenalizedOperator(ScatteringKernel::sample(q, [&](double v, double vp) { return k(0.0, v, vp); }), q);
    }
    const auto table = read_kernel_table(spec.kernel_file, q.size());
    const auto n = static_cast<Eigen::Index>(q.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(j, i) = table[static_cast<std::size_t>(j * n + i)];
    return PenalizedOperator(ScatteringKernel(q, std::move(m)), q);
}

namespace detail {

// Integrates to every output time, shrinking the last step so the state
// lands exactly on it. `advance(state, h)` performs one step.
template <class State, class Advance, class Record, class Observe>
void time_loop(State& s, double& t, const std::vector<double>& times, double dt, Advance&& advance, Record&& record,
               Observe&& observe, std::size_t& steps) {
    for (double target : times) {
        while (t < target) {
            double h = dt;
            bool last = false;
            if (target - t <= dt * (1.0 + 1e-9)) {
                h = target - t;
                last = true;
            }
            advance(s, h);
            ++steps;
            t = last ? target : t + h;
            observe(s);
        }
        record(s, target);
    }
}

}  // namespace detail

inline RunResult run(const ExperimentSpec& spec, std::size_t cells, SchemeKind scheme, const RunOptions& opt = {}) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    Discretization d = discretize(spec, cells);

    RunResult r;
    r.name = spec.id + "_" + to_string(scheme) + "_" + std::to_string(cells);
    r.scheme = scheme;
    r.cells = cells;
    r.x_min = spec.x_min;
    r.x_max = spec.x_max;
    r.nodes.assign(d.q.nodes().begin(), d.q.nodes().end());
    const auto centers = d.mesh.centers();

    auto record_state = [&](const KineticState& s, double t) {
        Snapshot snap;
        snap.t = t;
        snap.x = centers;
        snap.rho = s.rho;
        snap.n_nodes = s.n_nodes;
        if (opt.keep_f) snap.f = s.f;
        r.snapshots.push_back(std::move(snap));
    };
    auto observe = [&](const KineticState& s) {
        if (opt.on_step) opt.on_step(s, d.q);
    };

    KineticState s = d.initial;
    double t = 0.0;

    if (scheme == SchemeKind::ugks || scheme == SchemeKind::ugks_id) {
        SchemeConfig cfg;
        cfg.eps = spec.eps;
        cfg.cfl = spec.cfl;
        cfg.cfl_form = spec.cfl_form;
        cfg.reconstruction = spec.order == 2 ? Reconstruction::mc_limited : Reconstruction::first_order;
        cfg.mc_theta = spec.mc_theta;
        cfg.diffusion = scheme == SchemeKind::ugks_id ? DiffusionMode::implicit_slopes : DiffusionMode::explicit_slopes;
        if (spec.penalized()) {
            PenalizedStepper stepper(cfg, make_operator(spec, d.q), d.mesh, d.q, d.bc, spec.allow_unstable);
            r.dt = opt.dt_override > 0 ? opt.dt_override : stepper.cfl_dt();
            detail::time_loop(s, t, spec.times, r.dt, [&](KineticState& st, double h) { stepper.advance(st, h); },
                              record_state, observe, r.steps);
        } else {
            UgksStepper stepper(cfg, d.material, d.mesh, d.q, d.bc);
            r.dt = opt.dt_override > 0 ? opt.dt_override : stepper.cfl_dt();
            detail::time_loop(s, t, spec.times, r.dt, [&](KineticState& st, double h) { stepper.advance(st, h); },
                              record_state, observe, r.steps);
        }
    } else if (scheme == SchemeKind::upwind) {
        UpwindStepper stepper(spec.eps, d.material, d.mesh, d.q, d.bc,
                              spec.order == 2 ? Reconstruction::mc_limited : Reconstruction::first_order, spec.mc_theta);
        r.dt = opt.dt_override > 0 ? opt.dt_override : spec.cfl * stepper.max_dt();
        detail::time_loop(s, t, spec.times, r.dt, [&](KineticState& st, double h) { stepper.advance(st, h); },
                          record_state, observe, r.steps);
    } else {
        DiffusionStepper stepper(diffusion_problem(d.material, d.mesh, d.bc, d.q));
        const DiffusionScheme ds = spec.diffusion_time;
        r.dt = opt.dt_override > 0 ? opt.dt_override
               : ds == DiffusionScheme::explicit_euler ? spec.cfl * stepper.problem().max_explicit_dt()
                                                       : spec.cfl * d.mesh.dx();
        std::vector<double> rho = s.rho;
        auto record = [&](const std::vector<double>& profile, double time) {
            Snapshot snap;
            snap.t = time;
            snap.x = centers;
            snap.rho = profile;
            r.snapshots.push_back(std::move(snap));
        };
        if (ds == DiffusionScheme::explicit_euler) {
            // same step sequence as time_loop, but full steps run in one batch
            for (double target : spec.times) {
                std::size_t full = 0;
                double tt = t;
                while (tt < target && target - tt > r.dt * (1.0 + 1e-9)) {
                    tt += r.dt;
                    ++full;
                }
                if (full) stepper.advance_explicit(rho, r.dt, full);
                if (tt < target) {
                    stepper.advance_explicit(rho, target - tt, 1);
                    ++full;
                }
                r.steps += full;
                t = target;
                record(rho, target);
            }
        } else {
            detail::time_loop(rho, t, spec.times, r.dt,
                              [&](std::vector<double>& p, double h) { stepper.advance(p, h, ds); }, record,
                              [](const std::vector<double>&) {}, r.steps);
        }
    }

    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline RunResult run(const ExperimentSpec& spec, std::size_t cells, const RunOptions& opt = {}) {
    return run(spec, cells, spec.scheme, opt);
}

// ---------------------------------------------------------------------------
// comparison

enum class Norm { l1, l2, linf };

inline Norm parse_norm(const std::string& s) {
    if (s == "l1" || s == "L1") return Norm::l1;
    if (s == "l2" || s == "L2") return Norm::l2;
    if (s == "linf" || s == "Linf" || s == "inf") return Norm::linf;
    throw ConfigError("unknown norm '" + s + "' (l1, l2, linf)");
}

/// Cell-average profile on a uniform mesh of [x_min, x_max].
struct Profile {
    double x_min = 0;
    double x_max = 1;
    std::vector<double> values;

    double dx() const { return (x_max - x_min) / static_cast<double>(values.size()); }
};

/// Piecewise-constant restriction onto a uniform mesh with n cells: each
/// target cell receives the overlap-weighted mean of the source cells.
inline std::vector<double> restrict_profile(const Profile& p, std::size_t n) {
    const double src_dx = p.dx();
    const double dst_dx = (p.x_max - p.x_min) / static_cast<double>(n);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = p.x_min + static_cast<double>(i) * dst_dx;
        const double b = a + dst_dx;
        auto j0 = static_cast<std::size_t>(std::max(0.0, std::floor((a - p.x_min) / src_dx)));
        double acc = 0.0;
        for (std::size_t j = j0; j < p.values.size(); ++j) {
            const double ca = p.x_min + static_cast<double>(j) * src_dx;
            const double cb = ca + src_dx;
            if (ca >= b) break;
            const double overlap = std::min(b, cb) - std::max(a, ca);
            if (overlap > 0.0) acc += overlap * p.values[j];
        }
        out[i] = acc / dst_dx;
    }
    return out;
}

struct Distance {
    double t = 0;
    double absolute = 0;
    double relative = 0;
};

inline double norm_of(const std::vector<double>& d, double dx, Norm norm) {
    double acc = 0.0;
    for (double x : d) {
        switch (norm) {
            case Norm::l1: acc += std::abs(x) * dx; break;
            case Norm::l2: acc += x * x * dx; break;
            case Norm::linf: acc = std::max(acc, std::abs(x)); break;
        }
    }
    return norm == Norm::l2 ? std::sqrt(acc) : acc;
}

/// Distance between two profiles on the coarser of the two meshes; the
/// relative value divides by the norm of `b` there.
inline Distance compare_profiles(const Profile& a, const Profile& b, Norm norm) {
    if (std::abs(a.x_min - b.x_min) > 1e-12 || std::abs(a.x_max - b.x_max) > 1e-12)
        throw InvalidArgument("profiles live on different domains");
    const std::size_t n = std::min(a.values.size(), b.values.size());
    const auto ra = a.values.size() == n ? a.values : restrict_profile(a, n);
    const auto rb = b.values.size() == n ? b.values : restrict_profile(b, n);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = ra[i] - rb[i];
    const double dx = (a.x_max - a.x_min) / static_cast<double>(n);
    Distance d;
    d.absolute = norm_of(diff, dx, norm);
    const double scale = norm_of(rb, dx, norm);
    d.relative = scale > 0.0 ? d.absolute / scale : d.absolute;
    return d;
}

inline Profile profile_of(const RunResult& r, std::size_t snapshot) {
    return {r.x_min, r.x_max, r.snapshots.at(snapshot).rho};
}

/// Per-output-time distances between two runs of the same experiment.
inline std::vector<Distance> compare(const RunResult& a, const RunResult& b, Norm norm) {
    if (a.snapshots.size() != b.snapshots.size()) throw InvalidArgument("runs have different output times");
    std::vector<Distance> out;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        if (std::abs(a.snapshots[k].t - b.snapshots[k].t) > 1e-12 * std::max(1.0, a.snapshots[k].t))
            throw InvalidArgument("runs have different output times");
        Distance d = compare_profiles(profile_of(a, k), profile_of(b, k), norm);
        d.t = a.snapshots[k].t;
        out.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceResult {
    std::vector<std::size_t> cells;
    std::vector<double> errors;  ///< at the last output time
    std::size_t reference_cells = 0;
    double order = 0;
    bool degenerate = false;  ///< errors at rounding level, slope meaningless
};

/// Least-squares slope of log(error) against log(dx).
inline double fitted_order(const std::vector<std::size_t>& cells, const std::vector<double>& errors, double length) {
    const std::size_t n = cells.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(length / static_cast<double>(cells[i]));
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nn = static_cast<double>(n);
    return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

/// Self-convergence against a finer run of the same scheme (or an explicit
/// reference run if `reference` is given). Resolutions run concurrently.
inline ConvergenceResult convergence_study(const ExperimentSpec& spec, std::vector<std::size_t> cells,
                                           std::size_t reference_cells = 0, Norm norm = Norm::l1,
                                           const RunResult* reference = nullptr) {
    if (cells.size() < 3) throw InvalidArgument("convergence study needs at least 3 resolutions");
    std::sort(cells.begin(), cells.end());
    const double ratio = static_cast<double>(cells[1]) / static_cast<double>(cells[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const double r = static_cast<double>(cells[i]) / static_cast<double>(cells[i - 1]);
        if (!(ratio > 1.0) || std::abs(r - ratio) > 1e-12 * ratio)
            throw InvalidArgument("cell counts must form a geometric progression");
    }

    ConvergenceResult out;
    out.cells = cells;
    std::vector<std::future<RunResult>> jobs;
    for (std::size_t c : cells) jobs.push_back(std::async(std::launch::async, [&spec, c] { return run(spec, c); }));
    RunResult ref;
    if (!reference) {
        out.reference_cells = reference_cells ? reference_cells : 4 * cells.back();
        ref = run(spec, out.reference_cells);
        reference = &ref;
    } else {
        out.reference_cells = reference->cells;
    }
    const std::size_t last = spec.times.size() - 1;
    double worst = 0.0;
    for (auto& j : jobs) {
        const RunResult r = j.get();
        const Distance d = compare_profiles(profile_of(r, last), profile_of(*reference, last), norm);
        out.errors.push_back(d.absolute);
        worst = std::max(worst, std::abs(d.absolute));
    }
    double scale = 0.0;
    for (double x : reference->snapshots[last].rho) scale = std::max(scale, std::abs(x));
    out.degenerate = worst <= 1e-13 * std::max(1.0, scale);
    for (double e : out.errors)
        if (!(e > 0.0)) out.degenerate = true;
    out.order = out.degenerate ? std::nan("") : fitted_order(out.cells, out.errors, spec.x_max - spec.x_min);
    return out;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_time(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

/// One file per output time, `<name>_t<time>.csv`, header `x,rho[,f_k...]`.
inline std::vector<std::filesystem::path> write_csv(const RunResult& r, const std::filesystem::path& dir,
                                                    const std::string& name = {}) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    const std::string base = name.empty() ? r.name : name;
    for (const auto& snap : r.snapshots) {
        const auto path = dir / (base + "_t" + format_time(snap.t) + ".csv");
        std::ofstream out(path);
        if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
        const bool with_f = !snap.f.empty();
        out << "x,rho";
        if (with_f)
            for (std::size_t k = 0; k < snap.n_nodes; ++k) out << ",f_" << k;
        out << '\n';
        char buf[40];
        for (std::size_t i = 0; i < snap.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", snap.x[i]);
            out << buf;
            std::snprintf(buf, sizeof buf, ",%.17g", snap.rho[i]);
            out << buf;
            if (with_f) {
                for (std::size_t k = 0; k < snap.n_nodes; ++k) {
                    std::snprintf(buf, sizeof buf, ",%.17g", snap.f[i * snap.n_nodes + k]);
                    out << buf;
                }
            }
            out << '\n';
        }
        files.push_back(path);
    }
    return files;
}

/// Reads the x and rho columns of a CSV written by write_csv. The mesh is
/// taken to be uniform with cell centers at the x column.
inline Profile read_csv_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,rho", 0) != 0)
        throw ConfigError("'" + path.string() + "': expected header starting with x,rho", 1);
    std::vector<double> x, rho;
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (detail::trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) throw ConfigError("malformed CSV row", ln);
        try {
            x.push_back(std::stod(a));
            rho.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw ConfigError("non-numeric CSV entry", ln);
        }
    }
    if (x.size() < 2) throw ConfigError("'" + path.string() + "': need at least 2 rows");
    const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    return {x.front() - 0.5 * dx, x.back() + 0.5 * dx, std::move(rho)};
}

}  // namespace ugks::harness

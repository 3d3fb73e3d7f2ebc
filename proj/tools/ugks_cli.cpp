// Command-line front end: built-in experiments, config runs, CSV
// comparisons and convergence studies.
//
// Exit codes: 0 success, 2 bad configuration or arguments, 3 solver
// failure, 4 comparison above threshold.

#include "ugks/harness/config.hpp"
#include "ugks/harness/run.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace ugks;
using namespace ugks::harness;

constexpr int exit_config = 2;
constexpr int exit_solver = 3;
constexpr int exit_threshold = 4;

struct OutputOptions {
    std::string out_dir = "out";
    bool with_f = false;
    bool reference = false;
};

std::vector<std::size_t> parse_cell_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& part : harness::detail::split_list(text)) out.push_back(harness::detail::parse_count(part, "cells", 0));
    if (out.empty()) throw ConfigError("cells: empty list");
    return out;
}

void run_and_report(const ExperimentSpec& spec, const OutputOptions& out) {
    RunOptions opt;
    opt.keep_f = out.with_f;
    std::vector<RunResult> results;
    for (std::size_t cells : spec.cells) {
        RunResult r = run(spec, cells, opt);
        const auto files = write_csv(r, out.out_dir);
        std::printf("%-28s dt=%.6g steps=%zu wall=%.3fs files=%zu -> %s\n", r.name.c_str(), r.dt, r.steps,
                    r.wall_seconds, files.size(), out.out_dir.c_str());
        results.push_back(std::move(r));
    }
    if (!out.reference || spec.reference_cells == 0) return;

    const RunResult ref = run(spec, spec.reference_cells, spec.reference_scheme);
    write_csv(ref, out.out_dir, spec.id + "_reference_" + to_string(spec.reference_scheme) + "_" +
                                    std::to_string(spec.reference_cells));
    std::printf("%-28s dt=%.6g steps=%zu wall=%.3fs (reference)\n", ref.name.c_str(), ref.dt, ref.steps,
                ref.wall_seconds);
    for (const auto& r : results) {
        const auto d = compare(r, ref, Norm::linf);
        for (const auto& x : d)
            std::printf("  %s vs reference  t=%-6g  linf=%.4e  rel=%.4e\n", r.name.c_str(), x.t, x.absolute,
                        x.relative);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UGKS solver for the 1D linear kinetic equation in diffusive scaling"};
    app.require_subcommand(1);

    OutputOptions out;

    auto* run_cmd = app.add_subcommand("run", "run a config file");
    std::string config_path;
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--out", out.out_dir, "output directory for CSV files");
    run_cmd->add_flag("--with-f", out.with_f, "also write the distribution f");
    run_cmd->add_flag("--reference", out.reference, "also run the reference solver and report distances");

    auto* ex_cmd = app.add_subcommand("example", "run a built-in experiment (ex1 .. ex7)");
    std::string ex_id, ex_scheme, ex_bc;
    std::size_t ex_cells = 0, ex_quad = 0;
    double ex_cfl = 0;
    bool ex_implicit = false, ex_second = false;
    ex_cmd->add_option("id", ex_id, "example id")->required();
    ex_cmd->add_option("--cells", ex_cells, "single cell count instead of the built-in pair");
    ex_cmd->add_option("--scheme", ex_scheme, "ugks, ugks_id, upwind or diffusion");
    ex_cmd->add_option("--bc", ex_bc, "stabilized, corrected or blended");
    ex_cmd->add_option("--quad", ex_quad, "number of velocity nodes");
    ex_cmd->add_option("--cfl", ex_cfl, "CFL factor");
    ex_cmd->add_flag("--implicit-diffusion", ex_implicit, "use implicit slopes (same as --scheme ugks_id)");
    ex_cmd->add_flag("--second-order", ex_second, "MC-limited reconstruction of f");
    ex_cmd->add_option("--out", out.out_dir, "output directory for CSV files");
    ex_cmd->add_flag("--with-f", out.with_f, "also write the distribution f");
    ex_cmd->add_flag("--reference", out.reference, "also run the reference solver and report distances");

    auto* cmp_cmd = app.add_subcommand("compare", "distance between two CSV profiles");
    std::string csv_a, csv_b, norm_name = "linf";
    double threshold = -1;
    bool relative = false;
    cmp_cmd->add_option("a", csv_a, "first CSV")->required();
    cmp_cmd->add_option("b", csv_b, "second CSV (reference)")->required();
    cmp_cmd->add_option("--norm", norm_name, "l1, l2 or linf");
    cmp_cmd->add_option("--threshold", threshold, "exit with code 4 if the distance exceeds this");
    cmp_cmd->add_flag("--relative", relative, "apply the threshold to the relative distance");

    auto* conv_cmd = app.add_subcommand("converge", "observed order of accuracy from a config");
    std::string conv_config, conv_cells = "25,50,100,200", conv_norm = "l1";
    std::size_t conv_ref = 0;
    conv_cmd->add_option("config", conv_config, "config file")->required();
    conv_cmd->add_option("--cells", conv_cells, "comma-separated geometric sequence of cell counts");
    conv_cmd->add_option("--reference-cells", conv_ref, "resolution of the self-convergence reference");
    conv_cmd->add_option("--norm", conv_norm, "l1, l2 or linf");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run_cmd) {
            run_and_report(load_config(config_path), out);
        } else if (*ex_cmd) {
            ExperimentSpec spec = builtin_example(ex_id);
            if (ex_cells) spec.cells = {ex_cells};
            if (!ex_scheme.empty()) spec.scheme = parse_scheme(ex_scheme);
            if (ex_implicit) spec.scheme = SchemeKind::ugks_id;
            if (!ex_bc.empty()) spec.bc = parse_bc(ex_bc);
            if (ex_quad) spec.nodes = ex_quad;
            if (ex_cfl > 0) spec.cfl = ex_cfl;
            if (ex_second) spec.order = 2;
            spec.validate();
            run_and_report(spec, out);
        } else if (*cmp_cmd) {
            const Norm norm = parse_norm(norm_name);
            const Distance d = compare_profiles(read_csv_profile(csv_a), read_csv_profile(csv_b), norm);
            std::printf("%s distance %.6e (relative %.6e)\n", norm_name.c_str(), d.absolute, d.relative);
            if (threshold >= 0 && (relative ? d.relative : d.absolute) > threshold) {
                std::printf("above threshold %.6e\n", threshold);
                return exit_threshold;
            }
        } else if (*conv_cmd) {
            const ExperimentSpec spec = load_config(conv_config);
            const auto res = convergence_study(spec, parse_cell_list(conv_cells), conv_ref, parse_norm(conv_norm));
            std::printf("reference cells %zu, norm %s\n", res.reference_cells, conv_norm.c_str());
            for (std::size_t i = 0; i < res.cells.size(); ++i)
                std::printf("  cells %6zu  error %.6e\n", res.cells[i], res.errors[i]);
            if (res.degenerate)
                std::printf("observed order: undefined (errors at rounding level)\n");
            else
                std::printf("observed order: %.3f\n", res.order);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidData& e) {
        std::cerr << "invalid data: " << e.what() << '\n';
        return exit_config;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return exit_config;
    }
    return 0;
}

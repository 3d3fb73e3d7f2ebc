#include "ugks/harness/config.hpp"
#include "ugks/harness/expression.hpp"
#include "ugks/harness/run.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace ugks;
using namespace ugks::harness;

namespace {

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "<no error>";
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ugks_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

// ---------------------------------------------------------------------------
// expressions

TEST(Expression, ArithmeticAndPrecedence) {
    EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0), 7.0);
    EXPECT_DOUBLE_EQ(Expression::parse("(1 + 2) * 3")(0), 9.0);
    EXPECT_DOUBLE_EQ(Expression::parse("-2^2")(0), -4.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0), 512.0);
    EXPECT_DOUBLE_EQ(Expression::parse("8 / 4 / 2")(0), 1.0);
    EXPECT_DOUBLE_EQ(Expression::parse("1e-2 * 3")(0), 0.03);
    EXPECT_DOUBLE_EQ(Expression::parse("1 + (10*x)^2")(0.3), 10.0);
}

TEST(Expression, VariablesAndFunctions) {
    const auto e = Expression::parse("0.5*(1 + 0.6*v*vp)");
    EXPECT_DOUBLE_EQ(e(0.0, 0.5, -1.0), 0.35);
    EXPECT_TRUE(e.uses_v());
    EXPECT_TRUE(e.uses_vp());
    EXPECT_FALSE(e.uses_x());
    EXPECT_DOUBLE_EQ(Expression::parse("exp(-100*(x-0.5)^2)")(0.5), 1.0);
    EXPECT_DOUBLE_EQ(Expression::parse("max(abs(v), min(2, sqrt(x)))")(9.0, -1.0), 2.0);
    EXPECT_NEAR(Expression::parse("sin(pi/2) + cos(0) + log(exp(1))")(0), 3.0, 1e-15);
}

TEST(Expression, Piecewise) {
    const auto e = Expression::parse("piecewise(x, 1, 0.1, 10, 0.5, 100)");
    EXPECT_EQ(e(0.05), 1.0);
    EXPECT_EQ(e(0.1), 10.0);
    EXPECT_EQ(e(0.3), 10.0);
    EXPECT_EQ(e(0.5), 100.0);
    EXPECT_EQ(e(0.9), 100.0);
    EXPECT_EQ(Expression::parse("piecewise(x, 7)")(3.0), 7.0);
}

TEST(Expression, ErrorsNameTheColumn) {
    EXPECT_NE(message_of([] { Expression::parse("1 + * 2"); }).find("column 5"), std::string::npos);
    EXPECT_NE(message_of([] { Expression::parse("foo(x)"); }).find("unknown name 'foo'"), std::string::npos);
    EXPECT_NE(message_of([] { Expression::parse("(1 + 2"); }).find("expected ')'"), std::string::npos);
    EXPECT_NE(message_of([] { Expression::parse("1 2"); }).find("trailing"), std::string::npos);
    EXPECT_NE(message_of([] { Expression::parse("min(1)"); }).find("takes 2"), std::string::npos);
    EXPECT_NE(message_of([] { Expression::parse("piecewise(x, 1, 0.5, 2, 0.2, 3)"); }).find("increase"),
              std::string::npos);
    EXPECT_NE(message_of([] { Expression::parse("x $ 2", 12); }).find("line 12"), std::string::npos);
}

// ---------------------------------------------------------------------------
// config files

TEST(Config, BuiltinExamples) {
    for (const auto& id : builtin_ids()) {
        const auto s = builtin_example(id);
        EXPECT_NO_THROW(s.validate()) << id;
        EXPECT_EQ(s.id, id);
    }
    EXPECT_EQ(builtin_example("ex2").eps, 1e-8);
    EXPECT_EQ(builtin_example("ex4").sigma(0.3), 10.0);
    EXPECT_EQ(builtin_example("ex3").sigma(0.2), 5.0);
    EXPECT_EQ(builtin_example("ex6").bc, BoundaryMode::blended);
    EXPECT_THROW(builtin_example("ex8"), ConfigError);
}

TEST(Config, OverridesAndComments) {
    const auto s = parse_config(
        "# base experiment\n"
        "example = ex5\n"
        "eps = 1e-3   # stiffer\n"
        "cells = 20, 40\n"
        "times = 0.1, 0.2\n"
        "bc = corrected\n"
        "quadrature = gauss\n"
        "nodes = 8\n"
        "domain = -1, 1\n"
        "scheme = ugks_id\n");
    EXPECT_EQ(s.id, "ex5");
    EXPECT_EQ(s.eps, 1e-3);
    EXPECT_EQ(s.cells, (std::vector<std::size_t>{20, 40}));
    EXPECT_EQ(s.times, (std::vector<double>{0.1, 0.2}));
    EXPECT_EQ(s.bc, BoundaryMode::corrected);
    EXPECT_EQ(s.quadrature, QuadratureFamily::gauss_legendre);
    EXPECT_EQ(s.nodes, 8u);
    EXPECT_EQ(s.x_min, -1.0);
    EXPECT_EQ(s.scheme, SchemeKind::ugks_id);
    EXPECT_DOUBLE_EQ(s.f_left(0.0, 0.25), 0.25);  // inherited from ex5
}

TEST(Config, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return std::size_t{999};
    };
    EXPECT_EQ(line_of("eps = 1\n\nfoo = 2\n"), 3u);
    EXPECT_EQ(line_of("eps = 1\neps = 2\n"), 2u);
    EXPECT_EQ(line_of("eps = 1\ncells\n"), 2u);
    EXPECT_EQ(line_of("\neps = abc\n"), 2u);
    EXPECT_EQ(line_of("sigma = 1 +\n"), 1u);
    EXPECT_EQ(line_of("x = 1\nexample = ex0\n"), 2u);
    EXPECT_EQ(line_of("bc = sideways\n"), 1u);
    EXPECT_EQ(line_of("cells = 10, -3\n"), 1u);
}

TEST(Config, SemanticValidation) {
    EXPECT_THROW(parse_config("eps = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("times = 0.2, 0.1\n"), ConfigError);
    EXPECT_THROW(parse_config("nodes = 7\n"), ConfigError);
    EXPECT_THROW(parse_config("cfl = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config("order = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("sigma = 1 + v\n"), ConfigError);
    EXPECT_THROW(parse_config("f_left = x\n"), ConfigError);
    EXPECT_THROW(parse_config("kernel = 0.5\nscheme = upwind\n"), ConfigError);
    EXPECT_NO_THROW(parse_config("kernel = 0.5\n"));
}

TEST(Config, LoadsShippedConfigs) {
    const std::filesystem::path dir = std::filesystem::path(UGKS_SOURCE_DIR) / "configs";
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") continue;
        EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 3u);
    EXPECT_THROW(load_config(dir / "missing.cfg"), ConfigError);
}

TEST(Config, KernelTable) {
    const auto dir = scratch_dir("kernel");
    {
        std::ofstream(dir / "k.txt") << "# 2x2\n0.5 0.5\n0.5 0.5\n";
        std::ofstream(dir / "short.txt") << "0.5 0.5 0.5\n";
        std::ofstream(dir / "junk.txt") << "0.5 abc\n";
    }
    EXPECT_EQ(read_kernel_table(dir / "k.txt", 2), std::vector<double>(4, 0.5));
    EXPECT_THROW(read_kernel_table(dir / "short.txt", 2), ConfigError);
    EXPECT_THROW(read_kernel_table(dir / "junk.txt", 2), ConfigError);
    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// profiles, comparison, output

TEST(Profiles, RestrictionAveragesOverlaps) {
    const Profile p{0.0, 1.0, {1, 2, 3, 4, 5, 6}};
    const auto r = restrict_profile(p, 3);
    EXPECT_NEAR(r[0], 1.5, 1e-15);
    EXPECT_NEAR(r[1], 3.5, 1e-15);
    EXPECT_NEAR(r[2], 5.5, 1e-15);
    // non-nested meshes still preserve the integral
    const auto q = restrict_profile(p, 4);
    double sum = 0.0;
    for (double x : q) sum += x * 0.25;
    EXPECT_NEAR(sum, 3.5, 1e-14);
    EXPECT_NEAR(q[0], (1.0 / 6 * 1 + 1.0 / 12 * 2) * 4, 1e-14);
}

TEST(Profiles, Norms) {
    const Profile a{0.0, 1.0, {1, 1, 1, 1}};
    const Profile b{0.0, 1.0, {1, 1, 1, 3}};
    EXPECT_DOUBLE_EQ(compare_profiles(a, b, Norm::linf).absolute, 2.0);
    EXPECT_DOUBLE_EQ(compare_profiles(a, b, Norm::l1).absolute, 0.5);
    EXPECT_DOUBLE_EQ(compare_profiles(a, b, Norm::l2).absolute, 1.0);
    EXPECT_DOUBLE_EQ(compare_profiles(a, b, Norm::linf).relative, 2.0 / 3.0);
    EXPECT_THROW(compare_profiles(a, Profile{0.0, 2.0, {1, 1}}, Norm::l1), InvalidArgument);
    EXPECT_EQ(parse_norm("L2"), Norm::l2);
    EXPECT_THROW(parse_norm("l3"), ConfigError);
}

TEST(Output, FormatTime) {
    EXPECT_EQ(format_time(0.1), "0.1");
    EXPECT_EQ(format_time(4.0), "4");
    EXPECT_EQ(format_time(1e-5), "1e-05");
}

TEST(Output, CsvRoundTrip) {
    auto spec = builtin_example("ex1");
    spec.times = {0.05, 0.1};
    RunOptions opt;
    opt.keep_f = true;
    const auto r = run(spec, 10, opt);
    ASSERT_EQ(r.snapshots.size(), 2u);
    EXPECT_EQ(r.name, "ex1_ugks_10");
    const auto dir = scratch_dir("csv");
    const auto files = write_csv(r, dir);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(files[1].filename(), "ex1_ugks_10_t0.1.csv");
    const Profile p = read_csv_profile(files[1]);
    EXPECT_NEAR(p.x_min, 0.0, 1e-15);
    EXPECT_NEAR(p.x_max, 1.0, 1e-15);
    EXPECT_EQ(p.values, r.snapshots[1].rho);
    {
        std::ofstream(dir / "bad.csv") << "a,b\n1,2\n";
    }
    EXPECT_THROW(read_csv_profile(dir / "bad.csv"), ConfigError);
    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// runs

TEST(Run, LandsExactlyOnOutputTimes) {
    auto spec = builtin_example("ex2");
    spec.times = {0.0, 0.003, 0.01};
    std::size_t observed = 0;
    RunOptions opt;
    opt.on_step = [&](const KineticState&, const VelocityQuadrature&) { ++observed; };
    const auto r = run(spec, 25, opt);
    ASSERT_EQ(r.snapshots.size(), 3u);
    EXPECT_EQ(r.snapshots[0].t, 0.0);
    for (double x : r.snapshots[0].rho) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(r.snapshots[2].t, 0.01);
    EXPECT_EQ(observed, r.steps);
    // 0.003 / 2.16e-3 and 0.007 / 2.16e-3 each round up
    EXPECT_EQ(r.steps, 2u + 4u);
}

TEST(Run, SchemesAgreeInTheirCommonRegime) {
    auto spec = builtin_example("ex2");
    spec.times = {0.05};
    const auto ugks = run(spec, 25, SchemeKind::ugks);
    const auto diff = run(spec, 25, SchemeKind::diffusion);
    EXPECT_LE(compare(ugks, diff, Norm::linf)[0].absolute, 1e-6);
    EXPECT_DOUBLE_EQ(diff.dt, ugks.dt);
}

TEST(Run, ConvergenceStudyInputErrors) {
    const auto spec = builtin_example("ex1");
    EXPECT_THROW(convergence_study(spec, {10, 20}), InvalidArgument);
    EXPECT_THROW(convergence_study(spec, {10, 20, 30}), InvalidArgument);
    EXPECT_THROW(convergence_study(spec, {10, 10, 10}), InvalidArgument);
}

TEST(Run, FittedOrder) {
    EXPECT_NEAR(fitted_order({10, 20, 40}, {1e-2, 2.5e-3, 6.25e-4}, 1.0), 2.0, 1e-12);
    EXPECT_NEAR(fitted_order({10, 20, 40}, {1e-2, 5e-3, 2.5e-3}, 2.0), 1.0, 1e-12);
}

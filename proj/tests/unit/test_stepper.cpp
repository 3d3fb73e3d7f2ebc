#include "ugks/reference.hpp"
#include "ugks/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <vector>

using namespace ugks;

namespace {

std::vector<double> linear_inflow(const VelocityQuadrature& q, bool left) {
    std::vector<double> f(q.size(), 0.0);
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double v = q.node(k);
        f[k] = left ? (v > 0 ? v : 0.0) : (v < 0 ? -v : 0.0);
    }
    return f;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(CflTimestep, Forms) {
    const auto q = build_double_gauss(16);
    const SpatialMesh m25(0.0, 1.0, 25);
    const auto mat = material_from_cells(std::vector<double>(25, 1.0), std::vector<double>(25, 0.0),
                                         std::vector<double>(25, 0.0));
    SchemeConfig cfg;
    cfg.eps = 1.0;
    EXPECT_NEAR(cfl_timestep(cfg, mat, m25), 0.036, 1e-15);  // 0.9 eps dx
    cfg.eps = 1e-8;
    EXPECT_NEAR(cfl_timestep(cfg, mat, m25), 2.16e-3, 1e-15);  // 0.9 * 1.5 dx^2 sigma
    cfg.cfl_form = CflForm::sum_form;
    cfg.eps = 1.0;
    EXPECT_NEAR(cfl_timestep(cfg, mat, m25), 0.9 * (0.04 + 2.4e-3), 1e-15);

    const SpatialMesh m200(0.0, 1.0, 200);
    const auto mat200 = material_from_cells(std::vector<double>(200, 1.0), std::vector<double>(200, 0.0),
                                            std::vector<double>(200, 0.0));
    cfg = SchemeConfig{};
    cfg.eps = 1e-4;
    cfg.diffusion = DiffusionMode::implicit_slopes;
    EXPECT_NEAR(cfl_timestep(cfg, mat200, m200), 4.5e-3, 1e-15);
}

TEST(SchemeConfig, Validation) {
    SchemeConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.cfl = 1.2;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg.cfl = 0.5;
    cfg.eps = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg.eps = 1.0;
    cfg.reconstruction = Reconstruction::mc_limited;
    cfg.mc_theta = 2.5;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

// Without collisions the scheme reduces to first-order upwind transport.
TEST(UgksStepper, CollisionlessEqualsUpwind) {
    const auto q = build_double_gauss(8);
    const SpatialMesh mesh(0.0, 1.0, 20);
    const auto mat = sample_material([](double) { return 0.0; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }, mesh);
    const BoundarySpec bc{linear_inflow(q, true), linear_inflow(q, false), BoundaryMode::stabilized,
                          WeightVariant::polynomial};
    SchemeConfig cfg;
    cfg.eps = 0.5;
    auto a = make_state(mesh, q, [](double x, double v) { return std::exp(-20 * (x - 0.5) * (x - 0.5)) * (1 + v); });
    auto b = a;
    UgksStepper ugks(cfg, mat, mesh, q, bc);
    UpwindStepper up(cfg.eps, mat, mesh, q, bc);
    const double dt = ugks.cfl_dt();
    for (int s = 0; s < 30; ++s) {
        ugks.advance(a, dt);
        up.advance(b, dt);
    }
    EXPECT_LE(max_diff(a.f, b.f), 1e-13);
    EXPECT_LE(max_diff(a.rho, b.rho), 1e-13);
    EXPECT_EQ(ugks.steps_taken(), 30u);
}

using MomentParam = std::tuple<BoundaryMode, DiffusionMode, Reconstruction, double>;
class MomentConsistency : public ::testing::TestWithParam<MomentParam> {};

// rho stays the discrete average of f after every step.
TEST_P(MomentConsistency, DensityIsAverageOfF) {
    const auto [mode, diff, rec, eps] = GetParam();
    const auto q = build_double_gauss(16);
    const SpatialMesh mesh(0.0, 1.0, 40);
    const auto mat = sample_material([](double x) { return 1 + 10 * x * x; }, [](double x) { return 0.1 * x; },
                                     [](double x) { return x < 0.5 ? 0.3 : 0.0; }, mesh);
    const BoundarySpec bc{linear_inflow(q, true), std::vector<double>(16, 0.2), mode, WeightVariant::polynomial};
    SchemeConfig cfg;
    cfg.eps = eps;
    cfg.diffusion = diff;
    cfg.reconstruction = rec;
    auto s = make_state(mesh, q, [](double x, double v) { return 0.5 + 0.3 * std::sin(6 * x) * v; });
    UgksStepper st(cfg, mat, mesh, q, bc);
    // below the explicit bound so every combination is stable
    const double dt = std::min(st.cfl_dt(), 0.9 * upwind_max_dt(1.0, mat, mesh));
    for (int k = 0; k < 20; ++k) {
        st.advance(s, dt);
        ASSERT_LE(moment_defect(s, q), 1e-12) << "step " << k;
    }
}

INSTANTIATE_TEST_SUITE_P(
    Schemes, MomentConsistency,
    ::testing::Combine(::testing::Values(BoundaryMode::stabilized, BoundaryMode::corrected, BoundaryMode::blended),
                       ::testing::Values(DiffusionMode::explicit_slopes, DiffusionMode::implicit_slopes),
                       ::testing::Values(Reconstruction::first_order, Reconstruction::mc_limited),
                       ::testing::Values(1.0, 1e-2, 1e-5)));

class ConstantState : public ::testing::TestWithParam<double> {};

// A constant isotropic state with matching inflow and source is a fixed point.
TEST_P(ConstantState, IsPreserved) {
    const double eps = GetParam(), c = 0.7, alpha = 0.4;
    const auto q = build_double_gauss(16);
    const SpatialMesh mesh(0.0, 1.0, 30);
    const auto mat = sample_material([](double x) { return 1 + x; }, [&](double) { return alpha; },
                                     [&](double) { return alpha * c; }, mesh);
    for (auto diff : {DiffusionMode::explicit_slopes, DiffusionMode::implicit_slopes}) {
        SchemeConfig cfg;
        cfg.eps = eps;
        cfg.diffusion = diff;
        UgksStepper st(cfg, mat, mesh, q, isotropic_boundary(q, c, c, BoundaryMode::blended));
        auto s = make_state(mesh, q, [&](double, double) { return c; });
        for (int k = 0; k < 10; ++k) st.advance(s, st.cfl_dt());
        // the O(1/eps) flux terms cancel only up to rounding
        const double tol = 1e-13 + 1e-17 / eps;
        for (double f : s.f) EXPECT_NEAR(f, c, tol);
        for (double r : s.rho) EXPECT_NEAR(r, c, tol);
    }
}

INSTANTIATE_TEST_SUITE_P(Eps, ConstantState, ::testing::Values(1.0, 1e-2, 1e-6));

// Implicit-slope systems are M-matrices: negative off-diagonals and a
// diagonal that dominates by at least 1/dt.
TEST(UgksStepper, ImplicitSystemIsDiagonallyDominant) {
    const auto q = build_double_gauss(16);
    const SpatialMesh mesh(0.0, 1.0, 50);
    const auto mat = sample_material([](double x) { return x < 0.5 ? 1.0 : 100.0; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }, mesh);
    SchemeConfig cfg;
    cfg.eps = 1e-6;
    cfg.diffusion = DiffusionMode::implicit_slopes;
    UgksStepper st(cfg, mat, mesh, q, isotropic_boundary(q, 1.0, 0.0));
    const auto s = make_state(mesh, q, [](double, double) { return 0.0; });
    const double dt = st.cfl_dt();
    const auto& sys = st.assemble(s, dt);
    for (std::size_t i = 0; i < 50; ++i) {
        if (i > 0) {
            EXPECT_LT(sys.lower[i], 0.0) << i;
        }
        if (i + 1 < 50) {
            EXPECT_LT(sys.upper[i], 0.0) << i;
        }
        EXPECT_GE(sys.diag[i] - std::abs(sys.lower[i]) - std::abs(sys.upper[i]), (1.0 / dt) * (1 - 1e-9)) << i;
    }
}

TEST(UgksStepper, CoefficientsFollowInterfaceMaterial) {
    const auto q = build_double_gauss(8);
    const SpatialMesh mesh(0.0, 1.0, 10);
    const auto mat = sample_material([](double x) { return 1 + x; }, [](double x) { return x; },
                                     [](double) { return 0.0; }, mesh);
    SchemeConfig cfg;
    cfg.eps = 0.1;
    UgksStepper st(cfg, mat, mesh, q, isotropic_boundary(q, 1.0, 1.0));
    for (std::size_t j : {0u, 4u, 10u}) {
        const auto want = flux_coefficients(1e-3, 0.1, mat.sigma_iface[j], mat.alpha_iface[j]);
        const auto& got = st.coefficients(j, 1e-3);
        EXPECT_EQ(got.a, want.a);
        EXPECT_EQ(got.d, want.d);
    }
}

TEST(UgksStepper, SecondOrderChangesSmoothSolutionOnly) {
    const auto q = build_double_gauss(8);
    const SpatialMesh mesh(0.0, 1.0, 40);
    const auto mat = sample_material([](double) { return 0.0; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }, mesh);
    SchemeConfig cfg;
    cfg.eps = 1.0;
    auto first = make_state(mesh, q, [](double x, double) { return std::exp(-50 * (x - 0.5) * (x - 0.5)); });
    auto second = first;
    auto flat = make_state(mesh, q, [](double, double) { return 0.0; });
    UgksStepper a(cfg, mat, mesh, q, isotropic_boundary(q, 0.0, 0.0));
    cfg.reconstruction = Reconstruction::mc_limited;
    UgksStepper b(cfg, mat, mesh, q, isotropic_boundary(q, 0.0, 0.0));
    for (int k = 0; k < 5; ++k) {
        a.advance(first, 0.01);
        b.advance(second, 0.01);
        b.advance(flat, 0.01);
    }
    EXPECT_GT(max_diff(first.rho, second.rho), 1e-4);
    for (double f : flat.f) EXPECT_EQ(f, 0.0);
    EXPECT_LE(moment_defect(second, q), 1e-14);
}

TEST(UgksStepper, PureStepLeavesInputUntouched) {
    const auto q = build_double_gauss(8);
    const SpatialMesh mesh(0.0, 1.0, 10);
    const auto mat = sample_material([](double) { return 1.0; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }, mesh);
    SchemeConfig cfg;
    const auto s0 = make_state(mesh, q, [](double x, double) { return x; });
    const auto s1 = step(s0, cfg, mat, mesh, q, isotropic_boundary(q, 1.0, 0.0), 0.01);
    EXPECT_EQ(s0.t, 0.0);
    EXPECT_DOUBLE_EQ(s1.t, 0.01);
    EXPECT_GT(max_diff(s0.f, s1.f), 0.0);
    const auto sys = assemble_macro_system(s0, cfg, mat, mesh, q, isotropic_boundary(q, 1.0, 0.0), 0.01);
    EXPECT_EQ(sys.diag.size(), 10u);
}

TEST(UgksStepper, Errors) {
    const auto q = build_double_gauss(8);
    const SpatialMesh mesh(0.0, 1.0, 10);
    const auto mat = sample_material([](double) { return 1.0; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }, mesh);
    SchemeConfig cfg;
    const auto bc = isotropic_boundary(q, 1.0, 0.0);
    EXPECT_THROW(UgksStepper(cfg, mat, SpatialMesh(0.0, 1.0, 12), q, bc), InvalidArgument);

    UgksStepper st(cfg, mat, mesh, q, bc);
    auto s = make_state(mesh, q, [](double, double) { return 1.0; });
    EXPECT_THROW(st.advance(s, 0.0), InvalidArgument);
    EXPECT_THROW(st.advance(s, NAN), InvalidArgument);
    EXPECT_THROW(st.advance(s, 0.01, std::vector<double>(3, 0.0)), InvalidArgument);
    auto wrong = make_state(SpatialMesh(0.0, 1.0, 11), q, [](double, double) { return 1.0; });
    EXPECT_THROW(st.advance(wrong, 0.01), InvalidArgument);

    s.at(4, 2) = NAN;
    try {
        st.advance(s, 0.01);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_DOUBLE_EQ(e.time(), 0.01);
    }
}

#include "ugks/coefficients.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ugks;

namespace {

struct Oracle {
    double dt, eps, sigma, alpha;
    double a, b, c, d, e;
};

// 30-digit mpmath evaluation of the closed forms, rounded to double.
constexpr Oracle oracles[] = {
    {1, 1, 1, 0, 0.6321205588285576784045, -0.264241117657115356809, 0.3678794411714423215955,
     -0.1036383235143269647866, 0.3678794411714423215955},
    {1e-2, 1e-3, 2, 0.5, 0.04999998750000312499922, -2.499998750000468801885e-5, 999.9497500250624697927,
     -0.4999497500375937312177, 0.000499974875012531255712},
    {1e-3, 1, 1e-6, 1e-7, 0.9999999994500000002017, -0.0004999999996333333438929, 4.999999998166666544995e-10,
     -1.666666665750041254011e-13, 0.0004999999998166666771254},
    {0.05, 0.3, 0.5, 0.2, 2.896584272893334161847, -0.2298205741849255252645, 0.4215724521621614817812,
     -0.02231939875711520700608, 0.07588304138918906110415},
    {2.16e-3, 1e-8, 1, 0, 4.629629629629629667301e-6, -4.629629629629629764165e-14, 99999999.99999536827811,
     -0.9999999999999074074074, 9.999999999999537246263e-9},
    {0.0045, 0.01, 3, 0.25, 0.7407345679526745398404, -0.002469094650720159182873, 99.2584382783950034201,
     -0.3283896296970157173071, 0.003308614609279833585085},
    {0.2, 1, 0.5, 0, 0.9516258196404042657602, -0.09357680320888939523768, 0.04837418035959573423977,
     -0.003171557510302073241859, 0.09674836071919146847954},
    // either side of the series switch x = 0.1
    {1, 1, 0.0999999, 0, 0.9516258664288074180811, -0.4678840469750621580896, 0.0483741335711925819189,
     -0.01585777247868310190194, 0.4837418194537452599915},
    {1, 1, 0.1000001, 0, 0.951625772852004212994, -0.4678839851138340547345, 0.04837422714799578700604,
     -0.015857802624336103525, 0.4837417877381701582595},
    // sigma = 0 with absorption
    {0.5, 2, 0, 1e-3, 0.499875020830729427059, -0.06247917057239588758172, 0.0, 0.0, 0.1249791692705729383661},
};

void expect_rel(double got, double want, double tol, const char* what) {
    if (want == 0.0)
        EXPECT_EQ(got, 0.0) << what;
    else
        EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << what << ": got " << got << ", want " << want;
}

}  // namespace

TEST(FluxCoefficients, MatchHighPrecisionOracles) {
    for (const auto& o : oracles) {
        SCOPED_TRACE(::testing::Message() << "dt=" << o.dt << " eps=" << o.eps << " sigma=" << o.sigma
                                          << " alpha=" << o.alpha);
        const auto k = flux_coefficients(o.dt, o.eps, o.sigma, o.alpha);
        expect_rel(k.a, o.a, 1e-13, "A");
        expect_rel(k.b, o.b, 1e-12, "B");
        expect_rel(k.c, o.c, 1e-12, "C");
        expect_rel(k.d, o.d, 1e-12, "D");
        expect_rel(k.e, o.e, 1e-13, "E");
        EXPECT_DOUBLE_EQ(k.nu, o.sigma / (o.eps * o.eps) + o.alpha);
    }
}

TEST(FluxCoefficients, SeriesAndClosedFormsAgreeAtSwitch) {
    const double x = detail::series_switch;
    for (double y : {0.5 * x, x, 1.5 * x}) {
        EXPECT_NEAR(detail::h1_series(y), detail::h1_direct(y), 1e-15);
        EXPECT_NEAR(detail::q1_series(y), detail::q1_direct(y), 1e-14);
        EXPECT_NEAR(detail::q2_series(y), detail::q2_direct(y), 1e-12);
        EXPECT_NEAR(detail::q3_series(y), detail::q3_direct(y), 1e-13);
    }
    // continuity of the switched evaluation
    const double below = std::nextafter(x, 0.0);
    EXPECT_NEAR(detail::h1(below), detail::h1(x), 1e-15);
    EXPECT_NEAR(detail::p2(below), detail::p2(x), 1e-15);
    EXPECT_NEAR(detail::p3(below), detail::p3(x), 1e-15);
    EXPECT_NEAR(detail::one_minus_h1(below), detail::one_minus_h1(x), 1e-15);
}

TEST(FluxCoefficients, CollisionlessLimitIsExact) {
    const auto k = flux_coefficients(0.3, 0.5, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(k.a, 2.0);
    EXPECT_EQ(k.c, 0.0);
    EXPECT_EQ(k.d, 0.0);
    EXPECT_DOUBLE_EQ(k.e, 0.3);  // dt / (2 eps)
    EXPECT_DOUBLE_EQ(k.b, -0.3 / (2 * 0.25));
}

// |A - 1/eps| <= nu dt / (2 eps): the series of h1 alternates.
TEST(FluxCoefficients, WeakCollisionRateBound) {
    const double dt = 1e-2, eps = 0.7;
    for (int p = 1; p <= 12; ++p) {
        const double s = std::pow(10.0, -p);
        const auto k = flux_coefficients(dt, eps, s, s);
        EXPECT_LE(std::abs(k.a - 1.0 / eps), k.nu * dt / (2 * eps) * (1 + 1e-12) + 1e-16) << p;
        EXPECT_LE(std::abs(k.c), k.nu * dt / eps) << p;
        EXPECT_LE(std::abs(k.d), k.nu * dt * dt / (eps * eps)) << p;
    }
}

TEST(FluxCoefficients, DiffusiveLimit) {
    double prev_a = INFINITY, prev_d = INFINITY;
    for (int p = 1; p <= 10; ++p) {
        const double eps = std::pow(10.0, -p);
        const auto k = flux_coefficients(1e-2, eps, 2.0, 0.0);
        const double da = std::abs(k.a), dd = std::abs(k.d + 0.5);
        EXPECT_LT(da, prev_a) << p;
        EXPECT_LE(dd, prev_d) << p;
        prev_a = da;
        prev_d = dd;
        EXPECT_TRUE(std::isfinite(k.b) && std::isfinite(k.c) && std::isfinite(k.e));
    }
    EXPECT_LT(prev_d, 1e-15);
}

// The scaled source coefficient eps E tends to dt / 2 without collisions.
TEST(FluxCoefficients, ScaledSourceCoefficientLimit) {
    const double dt = 0.04;
    for (double eps : {1.0, 1e-2, 1e-4}) {
        const auto k = flux_coefficients(dt, eps, 1e-14 * eps * eps, 0.0);
        EXPECT_NEAR(eps * k.e, dt / 2, 1e-12) << eps;
    }
}

TEST(FluxCoefficients, FiniteForHugeStiffness) {
    const auto k = flux_coefficients(1e3, 1e-15, 1e3, 1e3);
    EXPECT_TRUE(std::isfinite(k.a) && std::isfinite(k.b) && std::isfinite(k.c) && std::isfinite(k.d) &&
                std::isfinite(k.e));
    EXPECT_NEAR(k.d, -1e-3, 1e-15);
}

TEST(FluxCoefficients, RejectsInvalidInput) {
    EXPECT_THROW(flux_coefficients(0.0, 1, 1, 0), InvalidArgument);
    EXPECT_THROW(flux_coefficients(1, 0.0, 1, 0), InvalidArgument);
    EXPECT_THROW(flux_coefficients(1, 1, -1, 0), InvalidArgument);
    EXPECT_THROW(flux_coefficients(1, 1, 1, -1), InvalidArgument);
    EXPECT_THROW(flux_coefficients(NAN, 1, 1, 0), InvalidArgument);
    EXPECT_THROW(flux_coefficients(1e300, 1e-300, 1, 0), InvalidArgument);
}

TEST(BlendParameter, Limits) {
    EXPECT_EQ(blend_parameter(0.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(blend_parameter(1.0, 1.0), 1.0 - std::exp(-1.0));
    EXPECT_EQ(blend_parameter(1e8, 1e-2), 1.0);
    EXPECT_NEAR(blend_parameter(1e-10, 1.0), 1e-10, 1e-20);
    EXPECT_THROW(blend_parameter(-1.0, 1.0), InvalidArgument);
    EXPECT_THROW(blend_parameter(1.0, 0.0), InvalidArgument);
}
